import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bec_dimer.operators import (DickeBasis, QuantumState, build_operators, commutator, expectation,
                                 left_well_state, right_well_state)

ns = st.integers(min_value=1, max_value=30)


def test_spin_half_is_pauli_over_two():
    ops = build_operators(1)
    np.testing.assert_array_equal(ops.jz, np.diag([-0.5, 0.5]))
    np.testing.assert_array_equal(ops.jx, 0.5 * np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(ops.jy, 0.5 * np.array([[0, 1j], [-1j, 0]]))


def test_ladder_element_n2():
    # <1,0|J+|1,-1> = sqrt(1*2 - (-1)*0) = sqrt(2)
    ops = build_operators(2)
    basis = DickeBasis(2)
    assert ops.jplus[basis.index(0), basis.index(-1)] == pytest.approx(np.sqrt(2), abs=1e-15)


@given(ns)
def test_jz_spectrum(n):
    ops = build_operators(n)
    np.testing.assert_array_equal(np.diag(ops.jz).real, np.arange(n + 1) - n / 2)


@given(ns)
def test_commutators_and_casimir(n):
    ops = build_operators(n)
    j = n / 2
    for a, b, c in ((ops.jx, ops.jy, ops.jz), (ops.jy, ops.jz, ops.jx), (ops.jz, ops.jx, ops.jy)):
        assert np.max(np.abs(commutator(a, b) - 1j * c)) < 1e-12
    cas = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
    assert np.max(np.abs(cas - j * (j + 1) * np.eye(n + 1))) < 1e-10


@given(ns)
def test_hermiticity_and_adjoint(n):
    ops = build_operators(n)
    for a in (ops.jx, ops.jy, ops.jz):
        np.testing.assert_array_equal(a, a.conj().T)
    np.testing.assert_array_equal(ops.jplus, ops.jminus.conj().T)


@given(ns)
def test_raising_top_state_gives_zero(n):
    ops = build_operators(n)
    top = right_well_state(n).amplitudes
    assert not np.any(ops.jplus @ top)


def test_deterministic_construction():
    a, b = build_operators(7), build_operators(7)
    for name in ("jx", "jy", "jz", "jplus", "jminus"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_matrices_are_read_only():
    ops = build_operators(3)
    with pytest.raises(ValueError):
        ops.jz[0, 0] = 1


@pytest.mark.parametrize("n", [0, -3])
def test_rejects_degenerate_particle_number(n):
    with pytest.raises(ValueError):
        build_operators(n)
    with pytest.raises(ValueError):
        left_well_state(n)


def test_left_well_state():
    np.testing.assert_array_equal(left_well_state(4).amplitudes, [1, 0, 0, 0, 0])
    assert expectation(left_well_state(1), build_operators(1).jz) == pytest.approx(-0.5)
    ops = build_operators(10)
    psi = left_well_state(10)
    assert expectation(psi, ops.jz).real == -5
    assert expectation(psi, ops.jz @ ops.jz).real - 25 == 0
    assert expectation(psi, ops.jx) == 0


def test_uniform_superposition_n2():
    # (1, 1, 1)/sqrt(3): <Jz> = (-1 + 0 + 1)/3
    psi = QuantumState.normalized([1, 1, 1])
    assert abs(expectation(psi, build_operators(2).jz)) < 1e-15


@given(ns, st.integers(0, 2 ** 32 - 1))
def test_hermitian_expectations_are_real(n, seed):
    rng = np.random.default_rng(seed)
    psi = QuantumState.normalized(rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1))
    ops = build_operators(n)
    for a in (ops.jx, ops.jy, ops.jz, ops.jx @ ops.jy + ops.jy @ ops.jx):
        assert abs(expectation(psi, a).imag) < 1e-10


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(left_well_state(3), build_operators(4).jz)


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        QuantumState(np.array([1.0, 1.0]))
