"""Stabilizer Renyi entropy of small density matrices.

All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .rdm import ReducedDensityMatrix

NEGATIVE_TOL = 1e-8
PURITY_TOL = 1e-10

# module-level so the self-test can be exercised against a wrong base
_log2 = np.log2


@dataclass(frozen=True)
class MagicReport:
    m2: float
    s2: float
    m2_tilde: float
    purity: float


def _moments(rho: ReducedDensityMatrix):
    c = np.asarray(rho.pauli_coeffs, dtype=float)
    dim = 2**rho.n_qubits
    fourth = float(np.sum(c**4)) / dim
    purity = float(np.sum(c**2)) / dim
    return fourth, purity


def _m2_from(fourth):
    if not fourth > 0:
        raise NumericalError(f"fourth Pauli moment {fourth!r} is not positive")
    value = -float(_log2(fourth))
    if value < -NEGATIVE_TOL:
        raise NumericalError(f"M2 = {value:.3e} is negative beyond roundoff")
    return value


def _s2_from(purity):
    if not 0 < purity <= 1 + PURITY_TOL:
        raise NumericalError(f"purity {purity!r} outside (0, 1]")
    return -float(_log2(purity))


def m2(rho: ReducedDensityMatrix) -> float:
    """``-log2(2^-n sum_P Tr(rho P)^4)``; zero on pure stabilizer states."""
    return _m2_from(_moments(rho)[0])


def renyi2(rho: ReducedDensityMatrix) -> float:
    """Second Renyi entropy ``-log2 Tr(rho^2)``."""
    return _s2_from(_moments(rho)[1])


def m2_tilde(rho: ReducedDensityMatrix) -> MagicReport:
    """M2, S2 and their difference from a single pass over the coefficients."""
    fourth, purity = _moments(rho)
    a = _m2_from(fourth)
    b = _s2_from(purity)
    return MagicReport(m2=a, s2=b, m2_tilde=a - b, purity=purity)


def m2_tilde_direct(rho: ReducedDensityMatrix) -> float:
    """Purity-normalised form ``-log2(sum_P Tr(rho P)^4 / (2^n Tr rho^2))``.

    Uses ``Tr(rho^2)`` from the matrix itself, independently of the
    coefficient-based purity in :func:`m2_tilde`.
    """
    c = np.asarray(rho.pauli_coeffs, dtype=float)
    mat = rho.matrix
    purity = float(np.real(np.trace(mat @ mat)))
    return -float(_log2(np.sum(c**4) / (2**rho.n_qubits * purity)))
