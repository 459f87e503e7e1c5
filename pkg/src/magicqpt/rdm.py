"""One- and two-site reduced density matrices of full-chain states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericalError
from .pauli import enumerate_pauli_group, pauli_basis, pauli_coefficients

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """A 1- or 2-qubit density matrix plus its Pauli coefficients ``Tr(rho P)``.

    ``pauli_coeffs`` follow :func:`~magicqpt.pauli.enumerate_pauli_group` order;
    the first listed source site is the first tensor factor.
    """

    n_qubits: int
    matrix: np.ndarray
    pauli_coeffs: np.ndarray
    source_sites: tuple = ()
    min_eigenvalue: float = field(default=0.0, compare=False)

    @classmethod
    def from_matrix(cls, matrix, source_sites=(), positivity_tol=POSITIVITY_TOL):
        """Validate ``matrix`` and attach its Pauli coefficients.

        Trace and Hermiticity are checked to 1e-10. Negative eigenvalues are
        reported in ``min_eigenvalue`` and only rejected below ``-positivity_tol``;
        they are never clipped.
        """
        mat = np.array(matrix, dtype=complex)
        dim = mat.shape[0]
        if mat.shape not in ((2, 2), (4, 4)):
            raise InvalidArgumentError(f"expected a 2x2 or 4x4 matrix, got {mat.shape}")
        n = 1 if dim == 2 else 2
        if abs(np.trace(mat) - 1) > TRACE_TOL:
            raise NumericalError(f"trace {np.trace(mat).real:.12f} differs from 1")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise NumericalError("density matrix is not Hermitian")
        mat = 0.5 * (mat + mat.conj().T)
        lam = float(np.linalg.eigvalsh(mat)[0])
        if lam < -positivity_tol:
            raise NumericalError(f"density matrix has eigenvalue {lam:.3e}")
        mat.setflags(write=False)
        coeffs = pauli_coefficients(mat)
        coeffs.setflags(write=False)
        return cls(n, mat, coeffs, tuple(source_sites), lam)

    @classmethod
    def from_pauli_coeffs(cls, coeffs, source_sites=(), positivity_tol=POSITIVITY_TOL):
        """Rebuild ``rho = 2^-n sum_P c_P P`` from a full coefficient vector."""
        coeffs = np.asarray(coeffs, dtype=float)
        n = {4: 1, 16: 2}.get(coeffs.size)
        if n is None:
            raise InvalidArgumentError("need 4 or 16 Pauli coefficients")
        mat = np.einsum("p,pab->ab", coeffs, pauli_basis(n)) / 2**n
        return cls.from_matrix(mat, source_sites, positivity_tol)

    @property
    def purity(self) -> float:
        return float(np.sum(self.pauli_coeffs**2) / 2**self.n_qubits)

    def coefficient(self, word: str) -> float:
        """Coefficient of a word given as a letter string, e.g. ``"XZ"``."""
        words = [str(p) for p in enumerate_pauli_group(self.n_qubits)]
        return float(self.pauli_coeffs[words.index(word)])

    def partial_trace_second(self) -> "ReducedDensityMatrix":
        """Trace out the second qubit of a two-qubit matrix."""
        if self.n_qubits != 2:
            raise InvalidArgumentError("only two-qubit matrices have a second qubit")
        m = self.matrix.reshape(2, 2, 2, 2)
        return ReducedDensityMatrix.from_matrix(np.einsum("ajbj->ab", m), self.source_sites[:1])


def _check_state(psi):
    psi = np.asarray(psi)
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if psi.ndim != 1 or 2**n != dim or n < 1:
        raise InvalidArgumentError("state must be a vector of length 2^N")
    return psi, n


def _partial(psi_t, n, sites):
    # tensor axis of site i is n - 1 - i
    axes = [n - 1 - s for s in sites]
    rest = [a for a in range(n) if a not in axes]
    m = np.transpose(psi_t, axes + rest).reshape(2 ** len(sites), -1)
    return m @ m.conj().T


def reduce_to_sites(psi, sites) -> ReducedDensityMatrix:
    """Exact partial trace of ``|psi><psi|`` onto one or two sites (0-based)."""
    psi, n = _check_state(psi)
    sites = tuple(int(s) for s in sites)
    if len(sites) not in (1, 2) or len(set(sites)) != len(sites):
        raise InvalidArgumentError(f"need one or two distinct sites, got {sites}")
    if any(not 0 <= s < n for s in sites):
        raise InvalidArgumentError(f"sites {sites} outside 0..{n - 1}")
    rho = _partial(psi.reshape((2,) * n), n, list(sites))
    return ReducedDensityMatrix.from_matrix(rho, sites)


def average_site_rdm(psi) -> ReducedDensityMatrix:
    """Site average of the one-site matrices of a ring state."""
    psi, n = _check_state(psi)
    t = psi.reshape((2,) * n)
    rho = sum(_partial(t, n, [i]) for i in range(n)) / n
    return ReducedDensityMatrix.from_matrix(rho, ("avg",))


def average_pair_rdm(psi, separation: int = 1) -> ReducedDensityMatrix:
    """``(1/N) sum_i rho(i, i + separation)`` on a periodic chain."""
    if separation not in (1, 2):
        raise InvalidArgumentError(f"separation must be 1 or 2, got {separation}")
    psi, n = _check_state(psi)
    t = psi.reshape((2,) * n)
    rho = sum(_partial(t, n, [i, (i + separation) % n]) for i in range(n)) / n
    return ReducedDensityMatrix.from_matrix(rho, ("avg", separation))


def rdm_csv_rows(rdms, labels=None) -> list[str]:
    """CSV block with one row of Pauli coefficients per matrix (debug export)."""
    rdms = list(rdms)
    if not rdms:
        return []
    n = rdms[0].n_qubits
    words = [str(p) for p in enumerate_pauli_group(n)]
    rows = ["label," + ",".join(words)]
    for k, r in enumerate(rdms):
        if r.n_qubits != n:
            raise InvalidArgumentError("mixed one- and two-qubit matrices in one block")
        label = labels[k] if labels is not None else str(k)
        rows.append(label + "," + ",".join(repr(float(c)) for c in r.pauli_coeffs))
    return rows
