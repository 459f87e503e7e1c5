"""Small Clifford-group helpers: stabilizer states and random Clifford circuits."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j])


def _embed(gate, site, n):
    out = np.eye(1)
    for q in range(n):
        out = np.kron(out, gate if q == site else np.eye(2))
    return out


def cnot(control: int, target: int, n: int) -> np.ndarray:
    """CNOT on ``n`` qubits; qubit 0 is the leftmost Kronecker factor."""
    dim = 2**n
    out = np.zeros((dim, dim))
    for s in range(dim):
        bits = [(s >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        t = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        out[t, s] = 1
    return out


def generators(n: int) -> list[np.ndarray]:
    """Hadamard and phase gates on each qubit plus CNOTs on ordered pairs."""
    gens = [_embed(H1, q, n) for q in range(n)] + [_embed(S1, q, n) for q in range(n)]
    gens += [cnot(a, b, n) for a in range(n) for b in range(n) if a != b]
    return gens


def _canonical(psi):
    k = int(np.argmax(np.abs(psi) > 1e-9))
    psi = psi * np.exp(-1j * np.angle(psi[k]))
    return psi, tuple(np.round(psi, 8).view(float).tolist())


@lru_cache(maxsize=None)
def _stabilizer_states(n):
    start = np.zeros(2**n, dtype=complex)
    start[0] = 1
    psi, key = _canonical(start)
    seen = {key: psi}
    frontier = [psi]
    gens = generators(n)
    while frontier:
        nxt = []
        for psi in frontier:
            for g in gens:
                phi, key = _canonical(g @ psi)
                if key not in seen:
                    seen[key] = phi
                    nxt.append(phi)
        frontier = nxt
    return tuple(seen.values())


def stabilizer_states(n: int) -> list[np.ndarray]:
    """All pure stabilizer states on ``n <= 3`` qubits (6, 60, 1080), phase-fixed."""
    if not 1 <= n <= 3:
        raise InvalidArgumentError("stabilizer enumeration supports 1 to 3 qubits")
    return [s.copy() for s in _stabilizer_states(n)]


def random_clifford(n: int, rng, depth: int = 40) -> np.ndarray:
    """Product of ``depth`` random generators; uniform enough for invariance checks."""
    gens = generators(n)
    u = np.eye(2**n, dtype=complex)
    for k in rng.integers(len(gens), size=depth):
        u = gens[k] @ u
    return u


@lru_cache(maxsize=None)
def _single_qubit_group():
    seen, frontier = {}, [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (H1, S1):
                w = g @ u
                # strip the global phase before deduplicating
                k = int(np.argmax(np.abs(w.reshape(-1)) > 1e-9))
                w = w * np.exp(-1j * np.angle(w.reshape(-1)[k]))
                key = tuple(np.round(w, 8).reshape(-1).view(float).tolist())
                if key not in seen:
                    seen[key] = w
                    nxt.append(w)
        frontier = nxt
    return tuple(seen.values())


def single_qubit_cliffords() -> list[np.ndarray]:
    """The 24 single-qubit Clifford unitaries modulo global phase."""
    return [u.copy() for u in _single_qubit_group()]
