import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicqpt import magic
from magicqpt.clifford import generators, random_clifford, single_qubit_cliffords, stabilizer_states
from magicqpt.errors import NumericalError
from magicqpt.magic import m2, m2_tilde, m2_tilde_direct, renyi2
from magicqpt.rdm import ReducedDensityMatrix
from magicqpt.selftest import random_density_matrix


def _rho(m):
    return ReducedDensityMatrix.from_matrix(m)


def _pure(psi):
    return _rho(np.outer(psi, np.conj(psi)))


def _bloch(x, y, z):
    return _rho(0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]))


def test_zero_state():
    assert m2(_rho(np.diag([1.0, 0]))) == pytest.approx(0, abs=1e-15)


def test_maximally_mixed():
    rep = m2_tilde(_rho(np.eye(2) / 2))
    assert (rep.m2, rep.s2, rep.m2_tilde) == (1.0, 1.0, 0.0)
    assert renyi2(_rho(np.eye(4) / 4)) == pytest.approx(2)


def test_bloch_closed_form():
    r = _bloch(1 / np.sqrt(2), 0, 1 / np.sqrt(2))
    # pure one-qubit states: M2 = -log2((1 + x^4 + y^4 + z^4)/2)
    assert m2(r) == pytest.approx(np.log2(4 / 3), abs=1e-12)
    rep = m2_tilde(r)
    assert rep.m2_tilde == pytest.approx(rep.m2, abs=1e-12)
    assert rep.s2 == pytest.approx(0, abs=1e-12)


@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_pure_qubit_closed_form(theta, phi):
    x, y, z = np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)
    expected = -np.log2((1 + x**4 + y**4 + z**4) / 2)
    assert m2(_bloch(x, y, z)) == pytest.approx(expected, abs=1e-10)


def test_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert m2(_pure(bell)) == pytest.approx(0, abs=1e-12)
    half = ReducedDensityMatrix.from_matrix(np.outer(bell, bell)).partial_trace_second()
    assert m2_tilde(half).m2_tilde == pytest.approx(0, abs=1e-12)


def test_stabilizer_zero():
    states = stabilizer_states(1) + stabilizer_states(2)
    assert len(states) == 66
    assert max(abs(m2(_pure(s))) for s in states) <= 1e-10


def test_stabilizer_counts():
    assert len(stabilizer_states(3)) == 1080


def test_t_state_is_magic():
    t = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    assert m2(_pure(t)) == pytest.approx(np.log2(4 / 3), abs=1e-12)


@given(st.integers(0, 10**6), st.integers(1, 2))
def test_two_routes(seed, n):
    rho = _rho(random_density_matrix(n, np.random.default_rng(seed)))
    rep = m2_tilde(rho)
    assert rep.m2_tilde == m2(rho) - renyi2(rho)
    assert rep.m2_tilde == pytest.approx(m2_tilde_direct(rho), abs=1e-12)
    assert rep.s2 == pytest.approx(-np.log2(rep.purity), abs=1e-12)


def test_two_routes_thousand():
    r = np.random.default_rng(0)
    for k in range(1000):
        rho = _rho(random_density_matrix(1 + k % 2, r))
        assert abs(m2_tilde(rho).m2_tilde - m2_tilde_direct(rho)) <= 1e-12


def test_single_qubit_clifford_invariance(rng):
    us = single_qubit_cliffords()
    assert len(us) == 24
    for _ in range(20):
        raw = random_density_matrix(1, rng)
        ref = m2_tilde(_rho(raw))
        for u in us:
            rep = m2_tilde(_rho(u @ raw @ u.conj().T))
            assert abs(rep.m2 - ref.m2) <= 1e-10 and abs(rep.m2_tilde - ref.m2_tilde) <= 1e-10


def test_two_qubit_generator_invariance(rng):
    for _ in range(20):
        raw = random_density_matrix(2, rng)
        ref = m2(_rho(raw))
        for g in generators(2) + [random_clifford(2, rng)]:
            assert abs(m2(_rho(g @ raw @ g.conj().T)) - ref) <= 1e-10


def test_enumeration_order_irrelevant(rng):
    rho = _rho(random_density_matrix(2, rng))
    perm = rng.permutation(16)
    c = rho.pauli_coeffs[perm]
    assert -np.log2(np.sum(c**4) / 4) == pytest.approx(m2(rho), abs=1e-14)


def test_negative_magic_raises():
    # fourth moment above one is impossible for a valid state
    fake = ReducedDensityMatrix(1, np.eye(2) / 2, np.array([1.0, 1.0, 1.0, 1.0]), (), 0.0)
    with pytest.raises(NumericalError):
        m2(fake)
    zero = ReducedDensityMatrix(1, np.eye(2) / 2, np.zeros(4), (), 0.0)
    with pytest.raises(NumericalError):
        m2(zero)
    with pytest.raises(NumericalError):
        renyi2(zero)


def test_log_base_is_two(monkeypatch):
    monkeypatch.setattr(magic, "_log2", np.log)
    assert m2(_rho(np.eye(2) / 2)) == pytest.approx(np.log(2))
