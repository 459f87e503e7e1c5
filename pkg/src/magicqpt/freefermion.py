"""Free-fermion route to one- and two-site RDMs of the TFIM and compass chain.

Pipeline: momentum grid -> 2x2 BdG blocks -> ground vectors ``(u_k, v_k)`` ->
real-space ``G_ij = <c_i^+ c_j>``, ``F_ij = <c_i c_j>`` -> 4x4 Nambu block of
neighbouring modes -> Majorana covariance -> Pauli correlators (Wick) ->
Pauli expansion of the RDM.

The RDMs live in the *fermionic frame* of the Jordan-Wigner spins, ``Z_j = 1 -
2 n_j`` with ``n_j = G_jj``. For the TFIM :func:`to_spin_frame` maps them onto
the physical sigma basis of ``-sum ZZ - gamma sum X``; the map is a product of
single-site Cliffords, so every magic measure is unchanged by it. For the
compass chain the modes are the bond spins ``X_{2i-1}X_{2i}`` of the
two-site-cell mapping, not physical sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalError, ReconstructionError
from .hamiltonian import QcmParams, TannniParams
from .pauli import enumerate_pauli_group
from .rdm import ReducedDensityMatrix

SECTORS = ("integer", "half_integer")
CONSISTENCY_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-6

_W = np.block([[np.eye(2), np.eye(2)], [-1j * np.eye(2), 1j * np.eye(2)]])
# (a_i, a_j, b_i, b_j) -> (a_i, b_i, a_j, b_j)
_INTERLEAVE = [0, 2, 1, 3]


def _model_of(params) -> str:
    if isinstance(params, QcmParams):
        return "qcm"
    if isinstance(params, TannniParams):
        if params.j2 != 0:
            raise InvalidArgumentError("the free-fermion route needs j2 = 0 (TFIM)")
        return "tfim"
    raise InvalidArgumentError(f"unsupported parameter type {type(params).__name__}")


def n_modes_for(model: str, n_sites: int) -> int:
    """``N`` fermionic modes for the TFIM, ``N/2`` for the compass chain."""
    if model == "tfim":
        if n_sites < 2 or n_sites % 2:
            raise InvalidArgumentError("TFIM needs an even number of sites")
        return n_sites
    if model == "qcm":
        if n_sites < 4 or n_sites % 4:
            raise InvalidArgumentError("QCM needs n_sites divisible by 4")
        return n_sites // 2
    raise InvalidArgumentError(f"unknown model {model!r}")


def momentum_grid(model: str, n_sites: int, sector: str = "integer") -> np.ndarray:
    """Allowed momenta of the chosen boundary sector.

    ``integer``: ``k = 2 pi m / N'``; ``half_integer``: ``k = 2 pi (m + 1/2) / N'``.
    TFIM grids are returned in ``[0, 2 pi)``, compass grids wrapped to ``(-pi, pi]``.
    """
    if sector not in SECTORS:
        raise InvalidArgumentError(f"sector must be one of {SECTORS}, got {sector!r}")
    nm = n_modes_for(model, n_sites)
    shift = 0.0 if sector == "integer" else 0.5
    ks = 2 * np.pi * (np.arange(nm) + shift) / nm
    if model == "qcm":
        ks = np.where(ks > np.pi + 1e-12, ks - 2 * np.pi, ks)
    return ks


def bdg_block(model: str, k, params, printed: bool = False) -> np.ndarray:
    """Hermitian block ``[[a, b], [b*, -a]]`` in the Nambu basis ``(c_k, c_-k^+)``.

    TFIM: ``a = 2(gamma - j1 cos k)``, ``b = 2i j1 sin k``. Compass chain:
    the same form with ``gamma -> jx`` and ``j1 -> jz`` on ``N/2`` modes.
    ``k`` may be an array; the result then has shape ``k.shape + (2, 2)``.

    Parameters
    ----------
    printed : bool
        Compass chain only: return the often-quoted block ``a = 2 jx - jz cos k``,
        ``b = i jz sin k`` instead. Its gap closes at ``jx/jz = 1/2`` and its
        vacuum energy does not match exact diagonalization, so it is kept for
        comparison and never used by the pipeline.
    """
    if _model_of(params) != model:
        raise InvalidArgumentError(f"parameters do not describe model {model!r}")
    if printed and model != "qcm":
        raise InvalidArgumentError("the printed variant exists for the compass chain only")
    if model == "tfim":
        field, coupling = params.gamma, params.j1
    else:
        field, coupling = params.jx, params.jz
    k = np.asarray(k, dtype=float)
    if printed:
        a = 2.0 * field - coupling * np.cos(k)
        b = 1j * coupling * np.sin(k)
    else:
        a = 2.0 * (field - coupling * np.cos(k))
        b = 2j * coupling * np.sin(k)
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = np.conj(b)
    out[..., 1, 1] = -a
    return out


@dataclass(frozen=True)
class BdGMode:
    """Lower-branch eigenvector ``(u, v)`` of one BdG block."""

    k: float
    u: complex
    v: complex
    energy: float
    degenerate: bool = False

    @property
    def occupation(self) -> float:
        return float(abs(self.v) ** 2)

    @property
    def pairing(self) -> complex:
        return complex(self.u * self.v)


def _lower_vectors(blocks):
    w, vecs = np.linalg.eigh(blocks)
    u, v = vecs[..., 0, 0], vecs[..., 1, 0]
    energy = w[..., 0]
    degenerate = np.abs(w[..., 1] - w[..., 0]) < 1e-14
    # phase convention: u real >= 0, or v real >= 0 when u vanishes
    ref = np.where(np.abs(u) > 1e-14, u, v)
    phase = np.exp(-1j * np.angle(ref))
    u, v = u * phase, v * phase
    u = np.where(degenerate, 1.0, u)
    v = np.where(degenerate, 0.0, v)
    energy = np.where(degenerate, 0.0, energy)
    return u, v, energy, degenerate


def bdg_ground_mode(block, k: float) -> BdGMode:
    """Normalised eigenvector of the lower eigenvalue of a 2x2 block.

    A vanishing block has no preferred vector; it is flagged ``degenerate``
    and mapped to the empty mode ``(1, 0)``.
    """
    block = np.asarray(block, dtype=complex)
    if block.shape != (2, 2) or np.max(np.abs(block - block.conj().T)) > 1e-12:
        raise InvalidArgumentError("expected a Hermitian 2x2 block")
    u, v, e, deg = _lower_vectors(block[None])
    return BdGMode(float(k), complex(u[0]), complex(v[0]), float(e[0]), bool(deg[0]))


def ground_modes(params, sector: str) -> list[BdGMode]:
    """Lower-branch modes on every momentum of the sector grid."""
    model = _model_of(params)
    ks = momentum_grid(model, params.n_sites, sector)
    u, v, e, deg = _lower_vectors(bdg_block(model, ks, params))
    return [BdGMode(float(k), complex(a), complex(b), float(c), bool(d))
            for k, a, b, c, d in zip(ks, u, v, e, deg)]


@dataclass(frozen=True)
class CorrelationData:
    """``G_ij = <c_i^+ c_j>`` and ``F_ij = <c_i c_j>`` on the listed modes."""

    n_modes: int
    G: np.ndarray
    F: np.ndarray
    sites: tuple

    def block(self, sites):
        try:
            idx = [self.sites.index(s) for s in sites]
        except ValueError:
            raise InvalidArgumentError(f"modes {sites} not materialised") from None
        return self.G[np.ix_(idx, idx)], self.F[np.ix_(idx, idx)]


def correlation_matrices(modes, n_modes: int, sites=None) -> CorrelationData:
    """Fourier sums ``G_ij = (1/N') sum_k e^{ik(i-j)} |v_k|^2``, ``F_ij`` with ``u_k v_k``.

    Only the modes in ``sites`` are materialised (all of them by default). On
    the half-integer grid ``G`` and ``F`` are translation invariant in ``i - j``
    but antiperiodic across the ring boundary.
    """
    modes = list(modes)
    if len(modes) != n_modes:
        raise InvalidArgumentError(f"{len(modes)} modes given for a grid of {n_modes}")
    sites = tuple(range(n_modes)) if sites is None else tuple(int(s) for s in sites)
    ks = np.array([m.k for m in modes])
    occ = np.array([m.occupation for m in modes])
    pair = np.array([m.pairing for m in modes])
    idx = np.array(sites)
    d = idx[:, None] - idx[None, :]
    phases = np.exp(1j * ks[None, None, :] * d[:, :, None]) / n_modes
    G = phases @ occ
    F = phases @ pair
    if np.max(np.abs(G - G.conj().T)) > CONSISTENCY_TOL:
        raise NumericalError("G is not Hermitian")
    if np.max(np.abs(F + F.T)) > CONSISTENCY_TOL:
        raise NumericalError("F is not antisymmetric")
    dg = np.diag(G).real
    if np.any(dg < -CONSISTENCY_TOL) or np.any(dg > 1 + CONSISTENCY_TOL):
        raise NumericalError("occupations outside [0, 1]")
    return CorrelationData(n_modes, G, F, sites)


@dataclass(frozen=True)
class MajoranaCovariance:
    """Real antisymmetric ``Gamma`` in the interleaved order ``(a_i, b_i, a_j, b_j)``.

    ``a = c + c^+``, ``b = i(c - c^+)`` and ``Gamma_kl = (i/2)<[g_k, g_l]>``, so
    ``<Z_i> = Gamma[0, 1]`` with ``Z = i a b = 1 - 2 c^+ c``.
    """

    gamma: np.ndarray
    site_pair: tuple


def majorana_covariance(corr: CorrelationData, site_pair) -> MajoranaCovariance:
    """``M = W C W^+`` and ``Gamma = (i/2)(M - M^T)`` for a pair of modes."""
    i, j = (int(s) for s in site_pair)
    if i == j:
        raise InvalidArgumentError("need two distinct modes")
    g, f = corr.block((i, j))
    C = np.block([[g, f.conj().T], [f, np.eye(2) - g.T]])
    M = _W @ C @ _W.conj().T
    gam = 0.5j * (M - M.T)
    if np.max(np.abs(gam.imag)) > CONSISTENCY_TOL:
        raise NumericalError("Majorana covariance has an imaginary residual")
    gam = gam.real[np.ix_(_INTERLEAVE, _INTERLEAVE)]
    return MajoranaCovariance(gam, (i, j))


def pauli_correlators(cov: MajoranaCovariance) -> dict[str, float]:
    """All 16 two-site Pauli expectations of neighbouring modes.

    Parity-odd words vanish exactly; ``ZZ`` is the Pfaffian of ``Gamma``.
    """
    g = cov.gamma
    vals = {str(p): 0.0 for p in enumerate_pauli_group(2)}
    vals["II"] = 1.0
    vals["ZI"] = g[0, 1]
    vals["IZ"] = g[2, 3]
    vals["XX"] = g[1, 2]
    vals["YY"] = -g[0, 3]
    vals["XY"] = -g[1, 3]
    vals["YX"] = g[0, 2]
    vals["ZZ"] = g[0, 1] * g[2, 3] - g[0, 2] * g[1, 3] + g[0, 3] * g[1, 2]
    return {k: float(v) for k, v in vals.items()}


def reconstruct_rdm(correlators: dict, n_qubits: int, source_sites=()) -> ReducedDensityMatrix:
    """``rho = 2^-n sum_P <P> P``; one qubit keeps only ``<Z>`` (parity symmetry)."""
    if n_qubits == 2:
        coeffs = [correlators.get(str(p), 0.0) for p in enumerate_pauli_group(2)]
    elif n_qubits == 1:
        z = correlators.get("Z", correlators.get("ZI", 0.0))
        coeffs = [1.0, 0.0, 0.0, z]
    else:
        raise InvalidArgumentError("n_qubits must be 1 or 2")
    try:
        return ReducedDensityMatrix.from_pauli_coeffs(
            coeffs, source_sites, positivity_tol=RECONSTRUCTION_TOL
        )
    except NumericalError as exc:
        raise ReconstructionError(f"reconstructed RDM invalid: {exc}") from exc


def ground_energy(params, sector: str) -> float:
    """BdG vacuum energy of a sector, ``-field N' + (1/2) sum_k (a_k - |E_k|)``.

    For the compass chain both sectors are physical; for the TFIM ring only
    the half-integer (even-parity) vacuum is an eigenstate.
    """
    model = _model_of(params)
    ks = momentum_grid(model, params.n_sites, sector)
    blocks = bdg_block(model, ks, params)
    a = blocks[..., 0, 0].real
    e = np.sqrt(a**2 + np.abs(blocks[..., 0, 1]) ** 2)
    field = params.gamma if model == "tfim" else params.jx
    return float(-field * ks.size + 0.5 * np.sum(a - e))


def sector_select(params: QcmParams) -> str:
    """Lower-energy compass sector; near-ties (< 1e-12 relative) go to half_integer."""
    if not isinstance(params, QcmParams):
        raise InvalidArgumentError("sector selection applies to the compass chain")
    e_int = ground_energy(params, "integer")
    e_half = ground_energy(params, "half_integer")
    if e_int < e_half - 1e-12 * max(1.0, abs(e_half)):
        return "integer"
    return "half_integer"


def resolve_sector(params, sector: str = "auto") -> str:
    """``auto`` picks the physical ground-state sector of either model."""
    if sector == "auto":
        if _model_of(params) == "qcm":
            return sector_select(params)
        # the TFIM ring ground state has even fermion parity
        return "half_integer"
    if sector in ("half", "half_integer"):
        return "half_integer"
    if sector in SECTORS:
        return sector
    raise InvalidArgumentError(f"unknown sector {sector!r}")


def ground_state_rdms(params, sector: str = "auto", pair=(0, 1)):
    """One- and two-mode RDMs of the free-fermion ground state.

    Returns ``(rho1, rho2, sector)`` with ``rho1`` on ``pair[0]``.
    """
    model = _model_of(params)
    sector = resolve_sector(params, sector)
    modes = ground_modes(params, sector)
    nm = n_modes_for(model, params.n_sites)
    corr = correlation_matrices(modes, nm, sites=pair)
    cov = majorana_covariance(corr, pair)
    vals = pauli_correlators(cov)
    rho2 = reconstruct_rdm(vals, 2, pair)
    rho1 = reconstruct_rdm(vals, 1, pair[:1])
    return rho1, rho2, sector


# fermionic-frame letter -> (physical letter, sign), first and second site of a pair
_SPIN_FRAME = (
    {"I": ("I", 1), "X": ("Z", 1), "Y": ("Y", 1), "Z": ("X", -1)},
    {"I": ("I", 1), "X": ("Z", -1), "Y": ("Y", -1), "Z": ("X", -1)},
)


def to_spin_frame(rho: ReducedDensityMatrix) -> ReducedDensityMatrix:
    """Express a TFIM fermionic-frame RDM in the sigma basis of the spin Hamiltonian."""
    words = [str(p) for p in enumerate_pauli_group(rho.n_qubits)]
    out = dict.fromkeys(words, 0.0)
    for word, c in zip(words, rho.pauli_coeffs):
        letters, sign = [], 1
        for pos, letter in enumerate(word):
            new, s = _SPIN_FRAME[pos][letter]
            letters.append(new)
            sign *= s
        out["".join(letters)] = sign * c
    return ReducedDensityMatrix.from_pauli_coeffs([out[w] for w in words], rho.source_sites)
