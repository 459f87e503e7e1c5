"""Matrix-free periodic spin-chain Hamiltonians.

Basis convention: site ``i`` (0-based) is bit ``i`` of the basis index and
spin-up is bit value 0, so ``Z|up> = +|up>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidArgumentError
from .pauli import PauliString


@dataclass(frozen=True)
class TannniParams:
    """Parameters of ``-j1 ZZ(nn) + j2 ZZ(nnn) - gamma X`` on a ring of ``n_sites``."""

    n_sites: int
    j1: float = 1.0
    j2: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites % 2:
            raise InvalidArgumentError(f"n_sites must be even and >= 4, got {self.n_sites}")
        if not self.j1 > 0:
            raise InvalidArgumentError(f"j1 must be positive, got {self.j1}")


@dataclass(frozen=True)
class QcmParams:
    """Compass chain ``-sum(jx X_{2i-1}X_{2i} + jz Z_{2i}Z_{2i+1})``."""

    n_sites: int
    jx: float = 1.0
    jz: float = 1.0

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites % 4:
            raise InvalidArgumentError(
                f"n_sites must be a positive multiple of 4, got {self.n_sites}"
            )
        if not self.jz > 0:
            raise InvalidArgumentError(f"jz must be positive, got {self.jz}")


@dataclass(frozen=True)
class HamiltonianOperator:
    """A real-coefficient sum of unsigned Pauli words on ``n_sites`` qubits."""

    n_sites: int
    terms: tuple[tuple[float, PauliString], ...]
    boundary: str = "periodic"

    def __post_init__(self):
        for coeff, word in self.terms:
            if word.n != self.n_sites:
                raise InvalidArgumentError(
                    f"term {word} has {word.n} letters, operator has {self.n_sites} sites"
                )
            if not np.isreal(coeff):
                raise InvalidArgumentError("coefficients must be real for a Hermitian operator")

    @property
    def dimension(self) -> int:
        return 2**self.n_sites

    @property
    def is_real(self) -> bool:
        """True when every word carries an even number of Y letters."""
        return all(word.n_y % 2 == 0 for _, word in self.terms)

    @cached_property
    def _compiled(self):
        n = self.n_sites
        diag = np.zeros(self.dimension)
        spins = None
        off: dict[tuple[int, int], complex] = {}
        for coeff, word in self.terms:
            x, z = word.xmask, word.zmask
            phase = (1j) ** word.n_y
            if x == 0:
                if spins is None:
                    idx = np.arange(self.dimension, dtype=np.int64)
                    spins = [(1 - 2 * ((idx >> i) & 1)).astype(np.int8) for i in range(n)]
                sign = np.ones(self.dimension, dtype=np.int8)
                for i in range(n):
                    if (z >> i) & 1:
                        sign *= spins[i]
                diag += coeff * sign
            else:
                off[(x, z)] = off.get((x, z), 0) + coeff * phase
        keys = sorted(k for k, c in off.items() if c != 0)
        xs = np.array([k[0] for k in keys], dtype=np.int64)
        zs = np.array([k[1] for k in keys], dtype=np.int64)
        cs = np.array([off[k] for k in keys])
        return diag, xs, zs, cs

    def diagonal(self) -> np.ndarray:
        return self._compiled[0].copy()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return matvec(self, v)

    def __matmul__(self, v):
        return matvec(self, v)

    def to_dense(self) -> np.ndarray:
        """Dense matrix, intended for small-N oracles only."""
        if self.n_sites > 14:
            raise InvalidArgumentError("refusing to densify more than 14 sites")
        eye = np.eye(self.dimension)
        cols = [matvec(self, eye[:, j]) for j in range(self.dimension)]
        return np.array(cols).T


def matvec(H: HamiltonianOperator, v: np.ndarray) -> np.ndarray:
    """``H @ v`` term by term with bit operations; never forms the matrix."""
    v = np.asarray(v)
    if v.shape != (H.dimension,):
        raise InvalidArgumentError(f"vector of shape {v.shape}, expected ({H.dimension},)")
    diag, xs, zs, cs = H._compiled
    if H.is_real:
        cs_real = np.ascontiguousarray(cs.real, dtype=np.float64)
        if np.iscomplexobj(v):
            out = np.empty(H.dimension, dtype=complex)
            re = np.empty(H.dimension)
            im = np.empty(H.dimension)
            kernels.matvec_real(diag, xs, zs, cs_real, np.ascontiguousarray(v.real), re)
            kernels.matvec_real(diag, xs, zs, cs_real, np.ascontiguousarray(v.imag), im)
            out.real, out.imag = re, im
            return out
        out = np.empty(H.dimension)
        kernels.matvec_real(diag, xs, zs, cs_real, np.ascontiguousarray(v, dtype=np.float64), out)
        return out
    return _matvec_complex(H.n_sites, diag, xs, zs, cs, v.astype(complex))


def _matvec_complex(n, diag, xs, zs, cs, v):
    out = diag * v
    idx = np.arange(2**n, dtype=np.int64)
    for x, z, c in zip(xs, zs, cs):
        src = idx ^ x
        par = np.zeros_like(idx)
        s = src & z
        while np.any(s):
            par ^= s & 1
            s >>= 1
        out += c * (1 - 2 * par) * v[src]
    return out


def _zz(n, i, j):
    return PauliString.from_sites(n, {i: "Z", j: "Z"}) if i != j else None


def build_tannni(params: TannniParams) -> HamiltonianOperator:
    """``3N`` terms: ``-j1`` ZZ on (i, i+1), ``+j2`` ZZ on (i, i+2), ``-gamma`` X on i."""
    n = params.n_sites
    terms = []
    for i in range(n):
        terms.append((-params.j1, _zz(n, i, (i + 1) % n)))
    for i in range(n):
        terms.append((params.j2, _zz(n, i, (i + 2) % n)))
    for i in range(n):
        terms.append((-params.gamma, PauliString.from_sites(n, {i: "X"})))
    return HamiltonianOperator(n, tuple(terms))


def build_tfim(n_sites: int, gamma: float, j1: float = 1.0) -> HamiltonianOperator:
    """Transverse-field Ising ring; the ``j2 = 0`` case of :func:`build_tannni`."""
    return build_tannni(TannniParams(n_sites, j1=j1, j2=0.0, gamma=gamma))


def transverse_field_operator(n_sites: int) -> HamiltonianOperator:
    """``-sum_i X_i``, the field term of TANNNI per unit ``gamma``."""
    return HamiltonianOperator(
        n_sites, tuple((-1.0, PauliString.from_sites(n_sites, {i: "X"})) for i in range(n_sites))
    )


def build_qcm_spin(params: QcmParams) -> HamiltonianOperator:
    """Compass ring: ``-jx`` XX on bonds (2i, 2i+1), ``-jz`` ZZ on (2i+1, 2i+2) mod N."""
    n = params.n_sites
    terms = []
    for i in range(n // 2):
        a, b, c = 2 * i, 2 * i + 1, (2 * i + 2) % n
        terms.append((-params.jx, PauliString.from_sites(n, {a: "X", b: "X"})))
        terms.append((-params.jz, PauliString.from_sites(n, {b: "Z", c: "Z"})))
    return HamiltonianOperator(n, tuple(terms))


_CONFIG_KEYS = {"model", "n_sites", "j1", "j2", "jx", "jz", "gamma"}


def parse_model_config(text: str) -> dict:
    """Read model parameters from JSON or ``key = value`` lines.

    Unknown keys are rejected. Numeric values are converted; ``model`` stays a string.
    """
    text = text.strip()
    if text.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgumentError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise InvalidArgumentError(f"unknown model keys {sorted(unknown)}")
    out = {}
    for key, value in raw.items():
        if key == "model":
            out[key] = str(value).lower()
        elif key == "n_sites":
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out


def load_model(path) -> HamiltonianOperator:
    """Build the Hamiltonian described by a model config file."""
    cfg = parse_model_config(Path(path).read_text())
    model = cfg.pop("model", None)
    if model in ("tannni", "tfim"):
        if model == "tfim" and cfg.get("j2", 0.0) != 0.0:
            raise InvalidArgumentError("tfim config must not set j2")
        if {"jx", "jz"} & set(cfg):
            raise InvalidArgumentError(f"{model} does not take jx/jz")
        return build_tannni(TannniParams(**cfg))
    if model == "qcm":
        if {"j1", "j2", "gamma"} & set(cfg):
            raise InvalidArgumentError("qcm does not take j1/j2/gamma")
        return build_qcm_spin(QcmParams(**cfg))
    raise InvalidArgumentError(f"unknown model {model!r}")
