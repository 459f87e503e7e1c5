"""Unsigned Pauli words and their expectation values.

A word is stored both as a letter string (``"XZIY"``) and as two bitmasks:
bit ``i`` of ``xmask`` is set when letter ``i`` is X or Y, bit ``i`` of
``zmask`` when it is Z or Y. Letter ``i`` acts on site/qubit ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, NumericalError

LETTERS = "IXYZ"
MAX_ENUMERATION_QUBITS = 8
MAX_WORD_QUBITS = 24
IMAG_TOL = 1e-10

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli word without phase."""

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise InvalidArgumentError("a Pauli word needs at least one letter")
        if len(self.letters) > MAX_WORD_QUBITS:
            raise InvalidArgumentError(
                f"words longer than {MAX_WORD_QUBITS} qubits are not supported"
            )
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise InvalidArgumentError(f"invalid Pauli letters {sorted(bad)!r}")

    @classmethod
    def from_sites(cls, n: int, ops: dict[int, str]) -> "PauliString":
        """Build a length-``n`` word with ``ops[site] = letter`` and I elsewhere."""
        letters = ["I"] * n
        for site, letter in ops.items():
            if not 0 <= site < n:
                raise InvalidArgumentError(f"site {site} outside 0..{n - 1}")
            letters[site] = letter
        return cls("".join(letters))

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def xmask(self) -> int:
        return sum(1 << i for i, c in enumerate(self.letters) if c in "XY")

    @property
    def zmask(self) -> int:
        return sum(1 << i for i, c in enumerate(self.letters) if c in "ZY")

    @property
    def n_y(self) -> int:
        return self.letters.count("Y")

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def matrix(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix; letter 0 is the leftmost Kronecker factor."""
        return _word_matrix(self.letters)

    def __str__(self):
        return self.letters


@lru_cache(maxsize=512)
def _word_matrix(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, _SINGLE[c])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[PauliString, ...]:
    return tuple(PauliString("".join(w)) for w in itertools.product(LETTERS, repeat=n))


def enumerate_pauli_group(n: int) -> list[PauliString]:
    """All ``4**n`` unsigned words in lexicographic I < X < Y < Z order.

    The identity comes first and letter 0 is the most significant digit, so
    for ``n = 2`` the order is ``II, IX, IY, IZ, XI, ...``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_ENUMERATION_QUBITS:
        raise InvalidArgumentError(
            f"n must be an integer in 1..{MAX_ENUMERATION_QUBITS}, got {n!r}"
        )
    return list(_enumerate(int(n)))


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """Stack of the enumerated word matrices, shape ``(4**n, 2**n, 2**n)``."""
    mats = np.array([p.matrix() for p in enumerate_pauli_group(n)])
    mats.setflags(write=False)
    return mats


def pauli_expectation(rho, P: PauliString) -> float:
    """Real part of ``Tr(rho P)``.

    ``rho`` may be a :class:`~magicqpt.rdm.ReducedDensityMatrix` or a plain
    square array.
    """
    mat = np.asarray(getattr(rho, "matrix", rho))
    if mat.shape != (2**P.n, 2**P.n):
        raise InvalidArgumentError(
            f"word on {P.n} qubits does not match matrix of shape {mat.shape}"
        )
    val = np.trace(mat @ P.matrix())
    if abs(val.imag) > IMAG_TOL:
        raise NumericalError(f"Tr(rho {P}) has imaginary part {val.imag:.3e}")
    return float(val.real)


def pauli_coefficients(mat: np.ndarray) -> np.ndarray:
    """Vector of ``Tr(mat P)`` over the enumerated group (must be Hermitian)."""
    mat = np.asarray(mat)
    dim = mat.shape[0]
    n = int(round(np.log2(dim)))
    if mat.shape != (dim, dim) or 2**n != dim:
        raise InvalidArgumentError(f"expected a 2^n square matrix, got shape {mat.shape}")
    # Tr(rho P) = sum_ab rho_ab P_ba
    vals = np.einsum("ab,pba->p", mat, pauli_basis(n))
    if np.max(np.abs(vals.imag)) > IMAG_TOL:
        raise NumericalError("Pauli coefficients have an imaginary residual above 1e-10")
    return vals.real.copy()


def expectation_on_state(psi: np.ndarray, P: PauliString) -> float:
    """``<psi|P|psi>`` for a full-chain state using the bitmask rules.

    Qubit ``i`` of the word is bit ``i`` of the basis index (bit 0 = site 0).
    """
    psi = np.asarray(psi)
    dim = psi.shape[0]
    if dim != 2**P.n:
        raise InvalidArgumentError(f"state of dimension {dim} for a {P.n}-qubit word")
    idx = np.arange(dim, dtype=np.int64)
    parity = np.zeros(dim, dtype=np.int64)
    z = idx & P.zmask
    while np.any(z):
        parity ^= z & 1
        z >>= 1
    # P|s> = i^{n_y} (-1)^{pop(s & z)} |s ^ x>
    phase = (1j) ** P.n_y * (1 - 2 * parity)
    val = np.vdot(psi[idx ^ P.xmask], phase * psi)
    if abs(val.imag) > IMAG_TOL:
        raise NumericalError(f"<psi|{P}|psi> has imaginary part {val.imag:.3e}")
    return float(val.real)
