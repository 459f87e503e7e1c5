"""Parameter sweeps, numerical derivatives, extremum refinement and finite-size scaling."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone

import numpy as np
from scipy import optimize, stats

from . import freefermion as ff
from .eigensolver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    degenerate_limit_ground_state,
    lanczos_ground_state,
    symmetric_start,
)
from .errors import (
    EdgeExtremumError,
    InvalidArgumentError,
    MagicQPTError,
    NumericalError,
    SweepError,
    UnreliableFitError,
)
from .hamiltonian import (
    QcmParams,
    TannniParams,
    build_qcm_spin,
    build_tannni,
    transverse_field_operator,
)
from .magic import m2, m2_tilde
from .rdm import average_pair_rdm, average_site_rdm

MODELS = ("tannni", "tfim", "qcm")
ENGINES = ("auto", "ed", "freefermion")
MEASURES = ("m2", "m2_tilde")
SITE_SETS = ("one_site", "two_site")
ED_MAX_SITES = 20
ED_GRID_STEP = 0.005
FF_GRID_STEP = 0.002
UNIFORM_TOL = 1e-12


@dataclass(frozen=True)
class Observable:
    measure: str = "m2_tilde"
    sites: str = "two_site"

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise InvalidArgumentError(f"measure must be one of {MEASURES}")
        if self.sites not in SITE_SETS:
            raise InvalidArgumentError(f"sites must be one of {SITE_SETS}")

    @property
    def name(self) -> str:
        return f"{self.measure}_{self.sites}"

    @classmethod
    def parse(cls, name: str) -> "Observable":
        for s in SITE_SETS:
            if name.endswith("_" + s):
                return cls(name[: -len(s) - 1], s)
        raise InvalidArgumentError(f"cannot parse observable {name!r}")


@dataclass(frozen=True)
class ModelSpec:
    """Everything but the control value needed to evaluate one sweep point.

    The control ``x`` is ``gamma/j1`` for TANNNI and TFIM and ``jx/jz`` for the
    compass chain.
    """

    model: str
    n_sites: int
    j1: float = 1.0
    j2: float = 0.0
    jz: float = 1.0
    engine: str = "auto"
    sector: str = "auto"
    separation: int = 1
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidArgumentError(f"model must be one of {MODELS}")
        if self.engine not in ENGINES:
            raise InvalidArgumentError(f"engine must be one of {ENGINES}")
        if self.model == "tfim" and self.j2 != 0:
            raise InvalidArgumentError("tfim has no j2 coupling")
        if self.separation not in (1, 2):
            raise InvalidArgumentError("separation must be 1 or 2")
        eng = self.resolved_engine
        if eng == "ed" and self.n_sites > ED_MAX_SITES:
            raise InvalidArgumentError(f"ED is limited to {ED_MAX_SITES} sites")
        if eng == "freefermion" and self.separation != 1:
            raise InvalidArgumentError("the free-fermion engine only builds nearest-neighbour pairs")
        self.params_at(1.0)  # validates sizes and couplings

    @property
    def control(self) -> str:
        return "jx/jz" if self.model == "qcm" else "gamma/j1"

    @property
    def resolved_engine(self) -> str:
        if self.engine != "auto":
            if self.model == "tannni" and self.engine == "freefermion" and self.j2 != 0:
                raise InvalidArgumentError("TANNNI with j2 != 0 is not free; use engine ed")
            return self.engine
        if self.model == "tannni":
            return "ed"
        if self.model == "tfim":
            return "freefermion" if self.n_sites > ED_MAX_SITES else "ed"
        # compass ED ground states are degenerate, so the physical-spin RDM is
        # basis dependent; the free-fermion route is used at every size
        return "freefermion"

    def params_at(self, x: float):
        if self.model == "qcm":
            return QcmParams(self.n_sites, jx=x * self.jz, jz=self.jz)
        return TannniParams(self.n_sites, j1=self.j1, j2=self.j2, gamma=x * self.j1)

    def config(self) -> dict:
        out = asdict(self)
        out["engine"] = self.resolved_engine
        return out


@dataclass(frozen=True)
class Grid:
    """``steps + 1`` equally spaced points from ``x_min`` to ``x_max``."""

    x_min: float
    x_max: float
    steps: int

    def __post_init__(self):
        if self.steps < 8:
            raise InvalidArgumentError("a sweep needs steps >= 8")
        if not self.x_max > self.x_min:
            raise InvalidArgumentError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.steps

    def points(self) -> np.ndarray:
        i = np.arange(self.steps + 1)
        # symmetric in i <-> steps - i, so mirrored grids are exactly mirrored
        return (self.x_min * (self.steps - i) + self.x_max * i) / self.steps

    @classmethod
    def with_spacing(cls, x_min, x_max, h):
        steps = round((x_max - x_min) / h)
        return cls(x_min, x_max, int(steps))


@dataclass
class SweepResult:
    """One observable on a uniform control grid.

    ``metadata`` carries the resolved solver settings and a timestamp; the
    timestamp is not written to CSV so reruns stay byte-identical.
    """

    model: str
    n_sites: int
    observable: str
    control: str
    x: np.ndarray
    y: np.ndarray
    metadata: dict = field(default_factory=dict)
    derivative: bool = False

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise InvalidArgumentError("x and y must be 1-d arrays of equal length")
        _check_uniform(self.x)
        if not np.all(np.isfinite(self.y)):
            raise NumericalError("sweep contains non-finite values")

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else float("nan")


def _check_uniform(x):
    if x.size < 2:
        return
    d = np.diff(x)
    if np.any(d <= 0):
        raise InvalidArgumentError("x must be strictly increasing")
    if np.max(np.abs(d - d.mean())) > UNIFORM_TOL * max(1.0, np.max(np.abs(x))):
        raise InvalidArgumentError("grid spacing is not uniform")


def _rdms(spec: ModelSpec, x: float, need_one: bool, need_two: bool):
    params = spec.params_at(x)
    if spec.resolved_engine == "freefermion":
        rho1, rho2, _ = ff.ground_state_rdms(params, spec.sector)
        if spec.model != "qcm":
            rho1, rho2 = ff.to_spin_frame(rho1), ff.to_spin_frame(rho2)
        return rho1, rho2
    if spec.model == "qcm":
        H, step = build_qcm_spin(params), 2
    else:
        H, step = build_tannni(params), 1
    res = None
    if spec.model != "qcm" and x == 0:
        # classical degenerate point: take the gamma -> 0+ limit so the curve is continuous
        res = degenerate_limit_ground_state(H, transverse_field_operator(spec.n_sites))
        if res.quasi_degenerate:
            res = None
    if res is None:
        v0 = symmetric_start(spec.n_sites, spec.seed, step=step)
        res = lanczos_ground_state(
            H, tol=spec.tol, max_iter=spec.max_iter, seed=spec.seed, v0=v0, resolve_gap=False
        )
    psi = res.vector
    rho1 = average_site_rdm(psi) if need_one else None
    rho2 = average_pair_rdm(psi, spec.separation) if need_two else None
    return rho1, rho2


def evaluate_point(spec: ModelSpec, x: float, observables) -> list[float]:
    """Values of every observable at control ``x`` from a single ground state."""
    need_one = any(o.sites == "one_site" for o in observables)
    need_two = any(o.sites == "two_site" for o in observables)
    rho1, rho2 = _rdms(spec, x, need_one, need_two)
    out = []
    for o in observables:
        rho = rho1 if o.sites == "one_site" else rho2
        out.append(m2(rho) if o.measure == "m2" else m2_tilde(rho).m2_tilde)
    return out


def _job(args):
    spec, x, observables = args
    try:
        return evaluate_point(spec, x, observables)
    except MagicQPTError as exc:
        raise SweepError(float(x), exc) from exc


def default_workers() -> int:
    env = os.environ.get("MAGICQPT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidArgumentError("MAGICQPT_THREADS must be an integer") from None
        if n < 1:
            raise InvalidArgumentError("MAGICQPT_THREADS must be positive")
        return n
    return os.cpu_count() or 1


def _check_zero(spec: ModelSpec, xs, allow_zero: bool):
    if allow_zero or spec.model == "qcm" or spec.resolved_engine != "ed":
        return
    multicritical = spec.model == "tannni" and math.isclose(spec.j2, 0.5 * spec.j1)
    if not multicritical and np.any(np.abs(xs) < 1e-12):
        raise InvalidArgumentError(
            "grid contains gamma = 0 where the ground state is degenerate; "
            "shift the grid or pass allow_zero"
        )


def sweep_many(spec: ModelSpec, grid: Grid, observables, workers: int | None = None,
               allow_zero: bool = False) -> dict[str, SweepResult]:
    """Evaluate several observables per ground state over ``grid``.

    Points are independent and dispatched to a process pool of ``workers``
    (serial when 1); results are assembled in grid order.
    """
    observables = [o if isinstance(o, Observable) else Observable.parse(o) for o in observables]
    if not observables:
        raise InvalidArgumentError("no observables requested")
    xs = grid.points()
    _check_zero(spec, xs, allow_zero)
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InvalidArgumentError("workers must be positive")
    jobs = [(spec, float(x), observables) for x in xs]
    if workers == 1 or len(jobs) == 1:
        rows = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    values = np.array(rows, dtype=float)
    meta = spec.config()
    meta.update(x_min=grid.x_min, x_max=grid.x_max, steps=grid.steps,
                timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"))
    return {
        o.name: SweepResult(spec.model, spec.n_sites, o.name, spec.control, xs,
                            values[:, k], dict(meta))
        for k, o in enumerate(observables)
    }


def sweep(spec: ModelSpec, grid: Grid, observable="m2_tilde_two_site", workers=None,
          allow_zero: bool = False) -> SweepResult:
    """Single-observable convenience wrapper around :func:`sweep_many`."""
    obs = observable if isinstance(observable, Observable) else Observable.parse(observable)
    return sweep_many(spec, grid, [obs], workers, allow_zero)[obs.name]


def batch_sweeps(spec: ModelSpec, j2_values, grid: Grid, observables, workers=None):
    """TANNNI sweeps over a list of ``j2`` couplings, keyed by ``j2``."""
    if spec.model != "tannni":
        raise InvalidArgumentError("batch sweeps vary j2 and need the tannni model")
    return {float(j2): sweep_many(replace(spec, j2=float(j2)), grid, observables, workers)
            for j2 in j2_values}


def central_derivative(s: SweepResult) -> SweepResult:
    """Second-order finite differences, one-sided 3-point stencils at the ends."""
    x, y = s.x, s.y
    if x.size < 3:
        raise InvalidArgumentError("need at least 3 points")
    _check_uniform(x)
    h = (x[-1] - x[0]) / (x.size - 1)
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2 * h)
    d[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
    d[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    return SweepResult(s.model, s.n_sites, s.observable, s.control, x, d,
                       dict(s.metadata), derivative=True)


def locate_extremum(d: SweepResult, kind: str = "maximum", window=None) -> float:
    """Sub-grid location of the extremum of ``d`` inside ``window``.

    The grid extremum is refined by the vertex of the parabola through it and
    its two neighbours.

    Raises
    ------
    EdgeExtremumError
        If the grid extremum is the first or last point of the window.
    """
    if kind not in ("maximum", "minimum"):
        raise InvalidArgumentError("kind must be 'maximum' or 'minimum'")
    x, y = d.x, d.y
    lo, hi = (x[0], x[-1]) if window is None else window
    eps = 1e-9 * max(1.0, abs(lo), abs(hi))
    idx = np.flatnonzero((x >= lo - eps) & (x <= hi + eps))
    if idx.size < 3:
        raise InvalidArgumentError("window must contain at least 3 grid points")
    sub = y[idx] if kind == "maximum" else -y[idx]
    j = int(np.argmax(sub))
    if j == 0 or j == idx.size - 1:
        raise EdgeExtremumError(
            f"{kind} at window edge x = {x[idx[j]]:.6g}; widen the window"
        )
    ym, y0, yp = sub[j - 1], sub[j], sub[j + 1]
    i = idx[j]
    h = x[i + 1] - x[i]
    denom = ym - 2 * y0 + yp
    if denom == 0:
        return float(x[i])
    return float(x[i] + 0.5 * h * (ym - yp) / denom)


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit ``ln|C(N) - C| = slope ln N + intercept``."""

    sizes: tuple
    finite_size_points: tuple
    c_star: float
    slope: float
    intercept: float
    r_squared: float
    mode: str

    def __post_init__(self):
        s = np.asarray(self.sizes)
        if s.size < 3 or np.any(np.diff(s) <= 0):
            raise InvalidArgumentError("sizes must be strictly increasing, at least 3")


def _loglog(sizes, cn, c):
    diff = np.abs(cn - c)
    res = stats.linregress(np.log(sizes), np.log(diff))
    return float(res.slope), float(res.intercept), float(res.rvalue**2)


def _r2(sizes, cn, c):
    diff = cn - c
    if np.any(diff == 0) or not (np.all(diff > 0) or np.all(diff < 0)):
        return -np.inf
    return _loglog(sizes, cn, c)[2]


def fss_fit(points, c: float | None = None, bracket=None, scan: int = 400) -> ScalingFit:
    """Finite-size-scaling fit of pseudo-critical points ``(N, C(N))``.

    With ``c`` given (``known_c`` mode) this is a least-squares line through
    ``(ln N, ln|C(N) - c|)``. Without it (``estimated_c`` mode) ``c`` is chosen
    to maximise the R^2 of that line: a dense scan over ``bracket`` followed by
    golden-section refinement.

    The default bracket lies beyond the point nearest the limit, on the side
    the sequence is heading, and extends four times the spread of ``C(N)``.

    Raises
    ------
    UnreliableFitError
        ``C(N) - c`` changes sign (known mode).
    InvalidArgumentError
        Fewer than 3 sizes, ``C(N) == c``, a non-monotone sequence in
        estimated mode, or a degenerate bracket.
    """
    pts = sorted((int(n), float(v)) for n, v in points)
    sizes = np.array([p[0] for p in pts], dtype=float)
    cn = np.array([p[1] for p in pts])
    if sizes.size < 3 or np.any(np.diff(sizes) <= 0):
        raise InvalidArgumentError("need at least 3 distinct sizes")
    if not np.all(np.isfinite(cn)):
        raise InvalidArgumentError("C(N) values must be finite")
    common = (tuple(int(n) for n in sizes), tuple(cn.tolist()))

    if c is not None:
        diff = cn - c
        if np.any(diff == 0):
            raise InvalidArgumentError("some C(N) equals the known C exactly")
        if not (np.all(diff > 0) or np.all(diff < 0)):
            raise UnreliableFitError("C(N) - C changes sign; approach is not monotone")
        slope, icpt, r2 = _loglog(sizes, cn, c)
        return ScalingFit(*common, float(c), slope, icpt, r2, "known_c")

    steps = np.diff(cn)
    if bracket is None:
        spread = float(cn.max() - cn.min())
        if spread == 0 or not (np.all(steps > 0) or np.all(steps < 0)):
            raise InvalidArgumentError("C(N) must be strictly monotone to bracket the limit")
        edge = cn[-1]
        if steps[0] < 0:  # decreasing towards the limit from above
            bracket = (edge - 4 * spread, edge - 1e-9 * spread)
        else:
            bracket = (edge + 1e-9 * spread, edge + 4 * spread)
    lo, hi = (float(b) for b in bracket)
    if not hi > lo:
        raise InvalidArgumentError("degenerate search bracket")

    def neg(cv):
        return -_r2(sizes, cn, cv)

    cand = np.linspace(lo, hi, scan)
    vals = np.array([neg(cv) for cv in cand])
    if not np.any(np.isfinite(vals)):
        raise InvalidArgumentError("no admissible C inside the bracket")
    k = int(np.argmin(vals))
    if 0 < k < scan - 1:
        res = optimize.minimize_scalar(
            neg, bracket=(cand[k - 1], cand[k], cand[k + 1]), method="golden",
            options={"xtol": 1e-10},
        )
        c_best = float(res.x) if res.fun <= vals[k] else float(cand[k])
    else:
        c_best = float(cand[k])
    slope, icpt, r2 = _loglog(sizes, cn, c_best)
    return ScalingFit(*common, c_best, slope, icpt, r2, "estimated_c")


def finite_size_points(spec: ModelSpec, sizes, grid: Grid, observable, kind: str,
                       window=None, workers=None):
    """Pseudo-critical points ``[(N, C(N))]`` from derivative extrema at each size."""
    out = []
    for n in sizes:
        s = sweep(replace(spec, n_sites=int(n)), grid, observable, workers)
        out.append((int(n), locate_extremum(central_derivative(s), kind, window)))
    return out


# -- CSV ---------------------------------------------------------------------

SWEEP_HEADER = "# model,n_sites,observable,control"


def _config_lines(config: dict) -> list[str]:
    return [f"# {k}={config[k]}" for k in sorted(config) if k != "timestamp"]


def format_sweep_csv(s: SweepResult) -> str:
    lines = [SWEEP_HEADER, f"# {s.model},{s.n_sites},{s.observable},{s.control}"]
    if s.derivative:
        lines.append("# derivative=True")
    lines += _config_lines(s.metadata)
    lines += [f"{x!r},{y!r}" for x, y in zip(s.x.tolist(), s.y.tolist())]
    return "\n".join(lines) + "\n"


def derivative_path(path: str) -> str:
    root = path[:-4] if path.endswith(".csv") else path
    return root + ".deriv.csv"


def write_sweep_csv(s: SweepResult, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_sweep_csv(s))


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return {"True": True, "False": False, "None": None}.get(value, value)


def read_sweep_csv(path) -> SweepResult:
    """Inverse of :func:`write_sweep_csv`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2 or lines[0] != SWEEP_HEADER:
        raise InvalidArgumentError(f"{path}: not a sweep file")
    model, n_sites, observable, control = lines[1][2:].split(",")
    meta, xs, ys = {}, [], []
    for line in lines[2:]:
        if line.startswith("#"):
            key, _, value = line[2:].partition("=")
            meta[key] = _coerce(value)
        elif line:
            a, b = line.split(",")
            xs.append(float(a))
            ys.append(float(b))
    deriv = bool(meta.pop("derivative", False))
    return SweepResult(model, int(n_sites), observable, control, xs, ys, meta, deriv)


def format_fss_csv(fit: ScalingFit, config: dict | None = None) -> str:
    lines = ["# finite-size scaling", f"# mode={fit.mode}"] + _config_lines(config or {})
    lines.append("N,C_N")
    lines += [f"{n},{c!r}" for n, c in zip(fit.sizes, fit.finite_size_points)]
    lines += ["c_star,slope,r2", f"{fit.c_star!r},{fit.slope!r},{fit.r_squared!r}"]
    return "\n".join(lines) + "\n"


def read_fss_csv(path) -> dict:
    """Parse a fit file into ``{'points': [(N, C_N)], 'c_star', 'slope', 'r2', 'mode'}``."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    mode = next((ln.split("=", 1)[1] for ln in lines if ln.startswith("# mode=")), None)
    body = [ln for ln in lines if not ln.startswith("#")]
    try:
        i, j = body.index("N,C_N"), body.index("c_star,slope,r2")
    except ValueError:
        raise InvalidArgumentError(f"{path}: not a scaling-fit file") from None
    pts = [(int(a), float(b)) for a, b in (ln.split(",") for ln in body[i + 1:j])]
    c_star, slope, r2 = (float(v) for v in body[j + 1].split(","))
    return {"points": pts, "c_star": c_star, "slope": slope, "r2": r2, "mode": mode}
