"""Command-line interface: ``magicqpt {tannni,tfim,qcm,fss,selftest}``.

Exit status: 0 success, 1 failing self-test, 2 usage error, 3 solver or
analysis failure. Every diagnostic is a single line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import criticality as cr
from .eigensolver import DEFAULT_MAX_ITER, DEFAULT_TOL
from .errors import InvalidArgumentError, MagicQPTError
from .plotting import sweep_svg, write_svg

SWEEP_COMMANDS = ("tannni", "tfim", "qcm")
MEASURE_NAMES = {"m2": "m2", "m2tilde": "m2_tilde"}
SITE_NAMES = {"one": "one_site", "two": "two_site"}
DEFAULT_SIZE = {"tannni": 12, "tfim": 12, "qcm": 400}
DEFAULT_RANGE = {"tannni": (0.01, 1.5), "tfim": (0.01, 2.0), "qcm": (0.5, 1.5)}
FSS_SIZES = (8, 10, 12, 14, 16)

# keys a --config file may set, by command family
_COMMON_KEYS = {"n", "j1", "j2", "jx", "jz", "gamma", "xmin", "xmax", "steps", "sites",
                "measure", "engine", "sector", "out", "plot", "seed", "tol", "max_iter",
                "threads", "separation", "allow_zero"}
_FSS_KEYS = _COMMON_KEYS - {"n", "jx", "gamma", "plot"} | {"model", "sizes", "kind", "window", "c"}
_DEFAULTS = {"j1": 1.0, "jz": 1.0, "sites": "two", "measure": "m2tilde", "engine": "auto",
             "sector": "auto", "plot": False, "seed": 0, "tol": DEFAULT_TOL,
             "max_iter": DEFAULT_MAX_ITER, "separation": 1, "allow_zero": False}


class UsageError(InvalidArgumentError):
    """Bad or conflicting command-line input (exit status 2)."""


def _add_common(p: argparse.ArgumentParser, fss: bool = False):
    S = argparse.SUPPRESS
    if not fss:
        p.add_argument("--n", type=int, default=S, help="number of sites")
    p.add_argument("--j1", type=float, default=S, help="nearest-neighbour coupling (TANNNI/TFIM)")
    p.add_argument("--j2", type=float, default=S, help="next-nearest-neighbour coupling (TANNNI)")
    p.add_argument("--jz", type=float, default=S, help="ZZ bond coupling (compass)")
    if not fss:
        p.add_argument("--jx", type=float, default=S,
                       help="evaluate the compass chain at a single jx instead of sweeping")
        p.add_argument("--gamma", type=float, default=S,
                       help="evaluate TANNNI/TFIM at a single field instead of sweeping")
    p.add_argument("--xmin", type=float, default=S, help="lower end of the control grid")
    p.add_argument("--xmax", type=float, default=S, help="upper end of the control grid")
    p.add_argument("--steps", type=int, default=S, help="grid intervals (points = steps + 1)")
    p.add_argument("--sites", choices=sorted(SITE_NAMES), default=S)
    p.add_argument("--measure", choices=sorted(MEASURE_NAMES), default=S)
    p.add_argument("--engine", choices=cr.ENGINES, default=S)
    p.add_argument("--sector", choices=("auto", "integer", "half"), default=S,
                   help="free-fermion boundary sector")
    p.add_argument("--separation", type=int, choices=(1, 2), default=S,
                   help="distance between the two sites of the pair RDM (ED only)")
    p.add_argument("--out", default=S, help="output CSV path")
    if not fss:
        p.add_argument("--plot", action="store_true", default=S, help="also write an SVG chart")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--tol", type=float, default=S, help="Lanczos residual tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--threads", type=int, default=S,
                   help="worker processes (default: $MAGICQPT_THREADS or CPU count)")
    p.add_argument("--allow-zero", dest="allow_zero", action="store_true", default=S,
                   help="permit gamma = 0 on the grid away from the multicritical point")
    p.add_argument("--config", default=None, help="JSON file with any of the options above")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magicqpt",
        description="Stabilizer Renyi entropy sweeps across quantum phase transitions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "tannni": "sweep gamma/j1 for the frustrated Ising chain (ED)",
        "tfim": "sweep gamma/j1 for the transverse-field Ising ring",
        "qcm": "sweep jx/jz for the quantum compass chain",
    }
    for name in SWEEP_COMMANDS:
        _add_common(sub.add_parser(name, help=helps[name]))
    p = sub.add_parser("fss", help="finite-size scaling of derivative extrema")
    _add_common(p, fss=True)
    p.add_argument("--model", choices=SWEEP_COMMANDS, default=argparse.SUPPRESS)
    p.add_argument("--sizes", default=argparse.SUPPRESS, help="comma-separated chain lengths")
    p.add_argument("--kind", choices=("maximum", "minimum"), default=argparse.SUPPRESS)
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                   default=argparse.SUPPRESS)
    p.add_argument("--c", type=float, default=argparse.SUPPRESS,
                   help="known critical point; omit to estimate it")
    sub.add_parser("selftest", help="run the invariant suite")
    return parser


def _load_config(path, allowed) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags into one explicit dict."""
    command = args.command
    allowed = _FSS_KEYS if command == "fss" else _COMMON_KEYS
    given = _load_config(args.config, allowed) if args.config else {}
    given.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
    model = given.get("model", "tannni") if command == "fss" else command
    if model not in SWEEP_COMMANDS:
        raise UsageError(f"unknown model {model!r}")

    forbidden = {"tannni": ("jx", "jz"), "tfim": ("jx", "jz", "j2"),
                 "qcm": ("j1", "j2", "gamma")}[model]
    bad = [k for k in forbidden if k in given]
    if bad:
        raise UsageError(f"--{bad[0].replace('_', '-')} does not apply to {model}")
    point = given.get("jx" if model == "qcm" else "gamma")
    if point is not None:
        clash = [k for k in ("xmin", "xmax", "steps", "plot") if given.get(k)]
        if clash:
            raise UsageError(f"single-point evaluation conflicts with --{clash[0]}")

    cfg = dict(_DEFAULTS)
    cfg.update(given)
    cfg["model"] = model
    cfg["command"] = command
    cfg.setdefault("j2", 0.0)
    if command != "fss":
        cfg.setdefault("n", DEFAULT_SIZE[model])
    lo, hi = DEFAULT_RANGE[model]
    cfg.setdefault("xmin", lo)
    cfg.setdefault("xmax", hi)
    if "steps" not in cfg:
        spacing = cr.FF_GRID_STEP if _engine_guess(cfg) == "freefermion" else cr.ED_GRID_STEP
        cfg["steps"] = max(8, round((cfg["xmax"] - cfg["xmin"]) / spacing))
    cfg.setdefault("out", f"{command}.csv")
    if cfg["sites"] not in SITE_NAMES or cfg["measure"] not in MEASURE_NAMES:
        raise UsageError("sites must be one/two and measure m2/m2tilde")
    if command == "fss":
        sizes = cfg.get("sizes", FSS_SIZES)
        if isinstance(sizes, str):
            try:
                sizes = [int(s) for s in sizes.split(",") if s.strip()]
            except ValueError:
                raise UsageError(f"bad --sizes {sizes!r}") from None
        cfg["sizes"] = [int(s) for s in sizes]
        cfg.setdefault("kind", "minimum" if cfg["measure"] == "m2" else "maximum")
        cfg.setdefault("window", None)
        cfg.setdefault("c", None)
    if "threads" not in cfg:
        cfg["threads"] = cr.default_workers()
    if cfg["threads"] < 1:
        raise UsageError("--threads must be positive")
    return cfg


def _engine_guess(cfg) -> str:
    if cfg["engine"] != "auto":
        return cfg["engine"]
    if cfg["model"] == "qcm":
        return "freefermion"
    if cfg["model"] == "tfim" and cfg.get("n", 0) > cr.ED_MAX_SITES:
        return "freefermion"
    return "ed"


def _spec(cfg, n_sites) -> cr.ModelSpec:
    sector = {"half": "half_integer"}.get(cfg["sector"], cfg["sector"])
    spec = cr.ModelSpec(
        model=cfg["model"], n_sites=int(n_sites), j1=float(cfg["j1"]), j2=float(cfg["j2"]),
        jz=float(cfg["jz"]), engine=cfg["engine"], sector=sector,
        separation=int(cfg["separation"]), tol=float(cfg["tol"]),
        max_iter=int(cfg["max_iter"]), seed=int(cfg["seed"]),
    )
    if spec.resolved_engine == "ed" and sector != "auto":
        raise UsageError("--sector only applies to the free-fermion engine")
    return spec


def _observable(cfg) -> cr.Observable:
    return cr.Observable(MEASURE_NAMES[cfg["measure"]], SITE_NAMES[cfg["sites"]])


def _echo(cfg) -> dict:
    # thread count never changes the numbers, keep it out of the files
    skip = {"threads", "out", "n", "xmin", "xmax", "steps"}
    return {k: v for k, v in cfg.items() if k not in skip}


def _root(path: str) -> str:
    return path[:-4] if path.endswith(".csv") else path


def run_sweep(cfg, out=print) -> int:
    spec = _spec(cfg, cfg["n"])
    obs = _observable(cfg)
    point = cfg.get("jx" if cfg["model"] == "qcm" else "gamma")
    if point is not None:
        base = cfg["jz"] if cfg["model"] == "qcm" else cfg["j1"]
        x = float(point) / base
        value = cr.evaluate_point(spec, x, [obs])[0]
        res = cr.SweepResult(spec.model, spec.n_sites, obs.name, spec.control, [x], [value],
                             {**_echo(cfg), **spec.config()})
        cr.write_sweep_csv(res, cfg["out"])
        out(f"{obs.name}({spec.control} = {x!r}) = {value!r}")
        out(f"wrote {cfg['out']}")
        return 0
    grid = cr.Grid(float(cfg["xmin"]), float(cfg["xmax"]), int(cfg["steps"]))
    s = cr.sweep(spec, grid, obs, workers=cfg["threads"], allow_zero=bool(cfg["allow_zero"]))
    s.metadata = {**_echo(cfg), **s.metadata}
    d = cr.central_derivative(s)
    cr.write_sweep_csv(s, cfg["out"])
    dpath = cr.derivative_path(cfg["out"])
    cr.write_sweep_csv(d, dpath)
    written = [cfg["out"], dpath]
    if cfg["plot"]:
        svg = _root(cfg["out"]) + ".svg"
        write_svg(sweep_svg(s, d), svg)
        written.append(svg)
    out(f"{len(s.x)} points, h = {grid.h:.6g}")
    out(f"observable minimum at {float(s.x[np.argmin(s.y)])!r}, "
        f"derivative minimum at {float(d.x[np.argmin(d.y)])!r}, "
        f"derivative maximum at {float(d.x[np.argmax(d.y)])!r}")
    out("wrote " + ", ".join(written))
    return 0


def run_fss(cfg, out=print) -> int:
    grid = cr.Grid(float(cfg["xmin"]), float(cfg["xmax"]), int(cfg["steps"]))
    obs = _observable(cfg)
    sizes = sorted(cfg["sizes"])
    spec = _spec(cfg, sizes[0])
    window = tuple(cfg["window"]) if cfg["window"] is not None else None
    pts = []
    for n in sizes:
        s = cr.sweep(replace(spec, n_sites=n), grid, obs, workers=cfg["threads"],
                     allow_zero=bool(cfg["allow_zero"]))
        c_n = cr.locate_extremum(cr.central_derivative(s), cfg["kind"], window)
        out(f"N = {n}: C(N) = {c_n:.6f}")
        pts.append((n, c_n))
    fit = cr.fss_fit(pts, c=cfg["c"])
    with open(cfg["out"], "w", newline="\n") as fh:
        fh.write(cr.format_fss_csv(fit, _echo(cfg)))
    out(f"{fit.mode}: c_star = {fit.c_star:.6f}, slope = {fit.slope:.6f}, "
        f"R^2 = {fit.r_squared:.6f}")
    out(f"wrote {cfg['out']}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed its one-line message
        return int(exc.code or 0)
    if args.command == "selftest":
        from .selftest import run_selftest

        rows = run_selftest()
        failed = [name for name, ok, _ in rows if not ok]
        if failed:
            print(f"magicqpt: selftest failed: {', '.join(failed)}", file=sys.stderr)
            return 1
        return 0
    try:
        cfg = resolve(args)
        return run_fss(cfg) if args.command == "fss" else run_sweep(cfg)
    except (UsageError, InvalidArgumentError) as exc:
        print(f"magicqpt: error: {exc}", file=sys.stderr)
        return 2
    except (MagicQPTError, ArithmeticError, OSError) as exc:
        print(f"magicqpt: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
