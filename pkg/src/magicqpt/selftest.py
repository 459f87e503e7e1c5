"""Fast invariant suite behind ``magicqpt selftest``."""

from __future__ import annotations

import time

import numpy as np

from . import freefermion as ff
from .clifford import random_clifford, stabilizer_states
from .criticality import fss_fit
from .eigensolver import lanczos_ground_state, symmetric_start
from .hamiltonian import TannniParams, build_tfim
from .magic import m2, m2_tilde
from .rdm import ReducedDensityMatrix, average_pair_rdm, average_site_rdm


def _pure(psi):
    return ReducedDensityMatrix.from_matrix(np.outer(psi, psi.conj()))


def random_density_matrix(n: int, rng, rank: int | None = None) -> np.ndarray:
    """``A A^+ / Tr`` with complex Gaussian ``A`` of the given rank."""
    dim = 2**n
    a = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def check_stabilizer_zero():
    worst = 0.0
    for n in (1, 2):
        for psi in stabilizer_states(n):
            worst = max(worst, abs(m2(_pure(psi))))
    return worst <= 1e-10, f"max |M2| = {worst:.2e} over 66 states"


def check_maximally_mixed():
    rho = ReducedDensityMatrix.from_matrix(np.eye(2) / 2)
    rep = m2_tilde(rho)
    ok = abs(rep.m2 - 1) <= 1e-12 and abs(rep.m2_tilde) <= 1e-12
    return ok, f"M2(I/2) = {rep.m2:.12f}, M2~(I/2) = {rep.m2_tilde:.1e}"


def check_parseval(samples: int = 200):
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(samples):
        n = 1 + k % 2
        rho = ReducedDensityMatrix.from_matrix(random_density_matrix(n, rng))
        lhs = float(np.sum(rho.pauli_coeffs**2)) / 2**n
        rhs = float(np.trace(rho.matrix @ rho.matrix).real)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_clifford_invariance(samples: int = 50):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(samples):
        raw = random_density_matrix(2, rng)
        u = random_clifford(2, rng)
        a = m2(ReducedDensityMatrix.from_matrix(raw))
        b = m2(ReducedDensityMatrix.from_matrix(u @ raw @ u.conj().T))
        worst = max(worst, abs(a - b))
    return worst <= 1e-10, f"max |dM2| = {worst:.2e}"


def check_ed_oracle(n_sites: int = 8, gammas=(0.5, 1.0, 2.0)):
    """Free-fermion RDMs against ED, entrywise in the Pauli basis."""
    worst = 0.0
    for g in gammas:
        res = lanczos_ground_state(build_tfim(n_sites, g), v0=symmetric_start(n_sites, 0),
                                   resolve_gap=False)
        ed2 = average_pair_rdm(res.vector)
        ed1 = average_site_rdm(res.vector)
        r1, r2, _ = ff.ground_state_rdms(TannniParams(n_sites, gamma=g))
        r1, r2 = ff.to_spin_frame(r1), ff.to_spin_frame(r2)
        worst = max(
            worst,
            float(np.max(np.abs(r2.pauli_coeffs - ed2.pauli_coeffs))),
            float(np.max(np.abs(r1.pauli_coeffs - ed1.pauli_coeffs))),
            abs(m2_tilde(r2).m2_tilde - m2_tilde(ed2).m2_tilde),
        )
    return worst <= 1e-8, f"max deviation {worst:.2e} (N={n_sites})"


def check_synthetic_fss():
    pts = [(n, 0.3 + 1.7 * n**-1.2) for n in (8, 10, 12, 14, 16)]
    known = fss_fit(pts, c=0.3)
    est = fss_fit(pts)
    ok = abs(known.slope + 1.2) <= 1e-6 and abs(est.c_star - 0.3) <= 1e-3
    return ok, f"slope {known.slope:.6f}, c_star {est.c_star:.6f}"


CHECKS = (
    ("stabilizer-zero", check_stabilizer_zero),
    ("maximally-mixed", check_maximally_mixed),
    ("parseval", check_parseval),
    ("clifford-invariance", check_clifford_invariance),
    ("ed-vs-free-fermion", check_ed_oracle),
    ("synthetic-fss", check_synthetic_fss),
)


def run_selftest(out=print) -> list[tuple[str, bool, str]]:
    """Run every check, print a table, return ``(name, passed, detail)`` rows."""
    rows = []
    for name, fn in CHECKS:
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, bool(ok), detail))
        out(f"{'PASS' if ok else 'FAIL'}  {name:<20} {detail}  [{time.perf_counter() - t:.2f}s]")
    return rows
