"""Lanczos ground states with full reorthogonalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, InvalidArgumentError, NumericalError
from .hamiltonian import HamiltonianOperator

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


@dataclass
class GroundStateResult:
    """Lowest eigenpair returned by :func:`lanczos_ground_state`.

    ``gap`` is the distance to the next eigenvalue seen by the solver: either a
    deflated second Lanczos run (``resolve_gap=True``) or the second Ritz value
    of the main run, which is only an upper bound.
    """

    energy: float
    vector: np.ndarray
    gap: float
    quasi_degenerate: bool
    iterations: int
    residual: float


def random_start(dim: int, seed: int) -> np.ndarray:
    """Seeded Gaussian start vector, unit norm."""
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def symmetric_start(n_sites: int, seed: int, step: int = 1, spin_flip: bool = True) -> np.ndarray:
    """Seeded positive vector projected onto the translation- and flip-even sector.

    For stoquastic chains such as TANNNI (``gamma != 0``) the ground state is
    unique with positive amplitudes, so it lives in this sector and the
    projection loses nothing; near-degenerate partners in other sectors are
    never reached.

    Parameters
    ----------
    step : int
        Translation unit in sites (2 for the compass chain).
    """
    if n_sites % step:
        raise InvalidArgumentError("step must divide n_sites")
    rng = np.random.default_rng(seed)
    v = rng.random(2**n_sites) + 0.5
    t = v.reshape((2,) * n_sites)
    acc = np.zeros_like(t)
    for shift in range(0, n_sites, step):
        # cyclic relabelling of sites == permutation of tensor axes
        acc += np.transpose(t, np.roll(np.arange(n_sites), shift))
    v = acc.reshape(-1)
    if spin_flip:
        v = v + v[::-1]
    return v / np.linalg.norm(v)


def _quasi_degenerate(energy, gap):
    if abs(energy) < 1e-2:
        return gap < 1e-8
    return gap < 1e-6 * abs(energy)


def _lanczos(H, v0, tol, max_iter, deflate=None, strict=True):
    """Core iteration. Returns (theta, y, residual, iterations, second_ritz)."""
    dim = H.dimension
    dtype = np.result_type(v0.dtype, np.float64 if H.is_real else complex)
    v = np.array(v0, dtype=dtype)
    if deflate is not None:
        v -= deflate * np.vdot(deflate, v)
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm == 0:
        raise NumericalError("start vector is zero or not finite")
    cap = min(max_iter + 1, 64)
    basis = np.empty((cap, dim), dtype=dtype)
    basis[0] = v / nrm
    alphas: list[float] = []
    betas: list[float] = []
    scale = 1.0
    best = np.inf
    threshold = tol
    for j in range(max_iter):
        w = H.matvec(basis[j]).astype(dtype, copy=False)
        a = np.vdot(basis[j], w).real
        w = w - a * basis[j]
        if j > 0:
            w -= betas[-1] * basis[j - 1]
        block = basis[: j + 1]
        for _ in range(2):
            w -= block.T @ (block.conj() @ w)
            if deflate is not None:
                w -= deflate * np.vdot(deflate, w)
        b = np.linalg.norm(w)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise NumericalError(f"non-finite Lanczos coefficient at iteration {j}")
        alphas.append(a)
        scale = max(scale, abs(a), b)
        k = min(2, len(alphas))
        theta, S = eigh_tridiagonal(
            np.array(alphas), np.array(betas), select="i", select_range=(0, k - 1)
        )
        estimate = b * abs(S[-1, 0])
        breakdown = b < 1e-13 * scale
        if estimate < threshold or breakdown or j == max_iter - 1:
            y = block.T @ S[:, 0]
            y /= np.linalg.norm(y)
            hy = H.matvec(y)
            energy = np.vdot(y, hy).real
            residual = np.linalg.norm(hy - energy * y)
            best = min(best, residual)
            if residual <= tol or breakdown or not strict:
                second = theta[1] if k > 1 else np.inf
                if breakdown and residual > tol and strict:
                    raise ConvergenceError(
                        f"Krylov space exhausted with residual {residual:.3e}", residual, j + 1
                    )
                return energy, y, residual, j + 1, second
            threshold = min(threshold, estimate) * 0.1
        betas.append(b)
        if j + 1 >= basis.shape[0]:
            grown = np.empty((min(2 * basis.shape[0], max_iter + 1), dim), dtype=dtype)
            grown[: j + 1] = basis[: j + 1]
            basis = grown
        basis[j + 1] = w / b
    raise ConvergenceError(
        f"Lanczos did not converge in {max_iter} iterations (best residual {best:.3e})",
        best,
        max_iter,
    )


def lanczos_ground_state(
    H: HamiltonianOperator,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    v0: np.ndarray | None = None,
    resolve_gap: bool = True,
) -> GroundStateResult:
    """Lowest eigenpair of ``H`` with residual ``||H v - E v|| <= tol``.

    Parameters
    ----------
    H : HamiltonianOperator
    tol : float
        Residual-norm target.
    max_iter : int
        Maximum Krylov dimension.
    seed : int
        Seeds the random start vector (ignored when ``v0`` is given).
    v0 : ndarray, optional
        Explicit start vector, e.g. from :func:`symmetric_start`.
    resolve_gap : bool
        Run a second, deflated Lanczos to measure the gap. Without it the
        gap is the second Ritz value of the main run.

    Raises
    ------
    ConvergenceError
        If the residual target is not met within ``max_iter`` iterations.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    if max_iter < 2:
        raise InvalidArgumentError("max_iter must be at least 2")
    if v0 is None:
        v0 = random_start(H.dimension, seed)
    elif np.shape(v0) != (H.dimension,):
        raise InvalidArgumentError("start vector has the wrong dimension")
    energy, y, residual, iters, second = _lanczos(H, np.asarray(v0), tol, max_iter)
    if resolve_gap:
        w0 = random_start(H.dimension, seed + 1).astype(y.dtype)
        second, _, _, _, _ = _lanczos(H, w0, max(tol, 1e-7), max_iter, deflate=y, strict=False)
    gap = float(second - energy)
    return GroundStateResult(
        energy=float(energy),
        vector=y,
        gap=gap,
        quasi_degenerate=bool(_quasi_degenerate(energy, gap)),
        iterations=iters,
        residual=float(residual),
    )


def degenerate_limit_ground_state(H0: HamiltonianOperator, V: HamiltonianOperator,
                                  level_tol: float = 1e-9) -> GroundStateResult:
    """Limit ``eps -> 0+`` of the ground state of ``H0 + eps V`` for diagonal ``H0``.

    First-order degenerate perturbation theory: diagonalise ``V`` inside the
    classical ground manifold of ``H0``. ``gap`` is the first-order splitting,
    so ``quasi_degenerate`` signals that first order does not lift the
    degeneracy and a higher order would be needed.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.linalg import eigsh

    if H0.n_sites != V.n_sites:
        raise InvalidArgumentError("H0 and V act on different chains")
    d0, xs0, _, _ = H0._compiled
    if xs0.size:
        raise InvalidArgumentError("H0 must be diagonal in the computational basis")
    if not V.is_real:
        raise InvalidArgumentError("V must be real")
    emin = float(d0.min())
    states = np.flatnonzero(d0 < emin + level_tol * max(1.0, abs(emin)))
    m = states.size
    pos = np.full(H0.dimension, -1, dtype=np.int64)
    pos[states] = np.arange(m)
    dv, xs, zs, cs = V._compiled
    rows, cols, vals = [np.arange(m)], [np.arange(m)], [dv[states]]
    for x, z, c in zip(xs, zs, cs):
        t = states ^ x
        hit = pos[t] >= 0
        parity = np.array([bin(int(v)).count("1") & 1 for v in (t[hit] & z)], dtype=float)
        rows.append(pos[t[hit]])
        cols.append(np.arange(m)[hit])
        vals.append(c.real * (1 - 2 * parity))
    P = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                   shape=(m, m)).tocsr()
    if m <= 2000:
        w, vec = np.linalg.eigh(P.toarray())
    else:
        w, vec = eigsh(P, k=2, which="SA")
        order = np.argsort(w)
        w, vec = w[order], vec[:, order]
    psi = np.zeros(H0.dimension)
    psi[states] = vec[:, 0]
    gap = float(w[1] - w[0]) if m > 1 else float("inf")
    return GroundStateResult(
        energy=emin, vector=psi / np.linalg.norm(psi), gap=gap,
        quasi_degenerate=bool(gap < 1e-8), iterations=0, residual=0.0,
    )
