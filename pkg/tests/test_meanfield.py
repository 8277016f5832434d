import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bec_dimer.dynamics import NormDriftError, PropagationConfig, TrajectoryRecord, propagate
from bec_dimer.meanfield import (BlochVector, ClassicalTrajectory, GPAmplitudes, bloch_rhs, compare_quantum_classical,
                                 gp_rhs, integrate_meanfield, lambda_ratio, self_trapped)
from bec_dimer.model import ModelParams, Schedule
from bec_dimer.operators import left_well_state

real = st.floats(-3, 3, allow_nan=False)


def params(n, u0=0.0, ut=0.0, utt=0.0, eps=0.0, omega=1.0):
    return ModelParams(n, u0, ut, utt, Schedule.constant(eps), Schedule.constant(omega))


def unit_vectors():
    return st.tuples(real, real, real).filter(lambda t: sum(x * x for x in t) > 1e-3).map(
        lambda t: BlochVector(*(x / math.sqrt(sum(y * y for y in t)) for x in t)))


def test_bloch_rhs_south_pole():
    assert bloch_rhs(BlochVector(0, 0, -1), 0.0, 1.0, 0.0) == BlochVector(0, 2, 0)


def test_bloch_rhs_free_fixed_point():
    assert bloch_rhs(BlochVector(1, 0, 0), 0.0, 0.0, 0.0) == BlochVector(0, 0, 0)


@given(unit_vectors(), real, real, real, real)
def test_bloch_rhs_tangent(b, eps, omega, u, utt):
    d = bloch_rhs(b, eps, omega, u, utt)
    assert abs(b.u * d.u + b.v * d.v + b.w * d.w) < 1e-12


def test_gp_rhs_decoupled_phase():
    d = gp_rhs(GPAmplitudes(1 + 0j, 0j), 0.3, -0.2, 0.5, 0.5, 0.0)
    assert d.c_left == pytest.approx(-1j * 0.8) and d.c_right == 0


@given(real, real, real, real, real, real, real, real, real)
def test_gp_rhs_norm_preserving(a, b, c, d, el, er, ul, ur, om):
    nrm = math.sqrt(a * a + b * b + c * c + d * d)
    if nrm < 1e-3:
        return
    amps = GPAmplitudes(complex(a, b) / nrm, complex(c, d) / nrm)
    dd = gp_rhs(amps, el, er, ul, ur, om)
    rate = 2 * (amps.c_left.conjugate() * dd.c_left + amps.c_right.conjugate() * dd.c_right).real
    assert abs(rate) < 1e-12


def test_gp_to_bloch_convention():
    amps = GPAmplitudes(1 / math.sqrt(2), 1j / math.sqrt(2))
    b = amps.to_bloch()
    # Jy = (a_R^dag a_L - a_L^dag a_R)/2i -> v = 2 Im(c_R^* c_L) = -1 for c_R = i c_L
    assert (b.u, b.v, b.w) == pytest.approx((0.0, -1.0, 0.0))


def test_gp_phase_rotation_rate():
    traj = integrate_meanfield(GPAmplitudes.left_well(), params(10, u0=0.05, eps=0.4, omega=0.0),
                               PropagationConfig(0, 2, 1e-3))
    assert np.max(np.abs(traj.pop_left - 1)) < 1e-12


def test_gp_linear_cos_squared():
    omega = 0.7
    traj = integrate_meanfield(GPAmplitudes.left_well(), params(5, omega=omega), PropagationConfig(0, 6, 1e-3))
    assert np.max(np.abs(traj.pop_left - np.cos(omega * traj.times) ** 2)) < 1e-10
    assert np.max(np.abs(traj.norm - 1)) < 1e-10


def test_linear_precession():
    omega = 1.3
    traj = integrate_meanfield(BlochVector.left_well(), params(20, omega=omega), PropagationConfig(0, 10, 1e-3))
    assert np.max(np.abs(traj.w + np.cos(2 * omega * traj.times))) < 1e-8


def test_strong_interaction_self_traps():
    p = params(50, u0=2 * 10 / 50)  # Lambda = 10
    assert lambda_ratio(p) == pytest.approx(10)
    traj = integrate_meanfield(BlochVector.left_well(), p, PropagationConfig(0, 20 * math.pi, 1e-3))
    assert self_trapped(traj.w)
    assert np.max(np.abs(traj.norm - 1)) < 1e-8


@pytest.mark.parametrize("eps", [0.0, 0.6])
def test_bloch_and_gp_agree(eps):
    n, u0 = 30, 0.04
    p = params(n, u0=u0, eps=eps, omega=-0.8)
    cfg = PropagationConfig(0, 8, 1e-3, record_stride=20)
    b = integrate_meanfield(BlochVector.left_well(), p, cfg)
    g = integrate_meanfield(GPAmplitudes.left_well(), p, cfg)
    for x, y in ((b.u, g.u), (b.v, g.v), (b.w, g.w)):
        assert np.max(np.abs(x - y)) < 1e-8


def test_corrections_match_quantum_at_large_n():
    # U_t shifts Omega, U_tt enters through the scaled Jx^2 - Jy^2 term
    n = 400
    p = params(n, u0=0.5 / n, ut=0.2 / n, utt=0.1 / n, eps=0.1, omega=1.0)
    cfg = PropagationConfig(0, 1.0, 1e-3, record_stride=50, method="magnus4")
    q = propagate(left_well_state(n), p, "full", cfg)
    full = compare_quantum_classical(q, integrate_meanfield(BlochVector.left_well(), p, cfg), n)
    bare = compare_quantum_classical(
        q, integrate_meanfield(BlochVector.left_well(), p, cfg, include_corrections=False), n)
    assert full.max_deviation < 0.01 < bare.max_deviation


def test_gp_rejects_utt():
    with pytest.raises(ValueError):
        integrate_meanfield(GPAmplitudes.left_well(), params(4, utt=0.1), PropagationConfig(0, 1, 0.01))


def test_unnormalized_initial_condition():
    with pytest.raises(ValueError):
        integrate_meanfield(BlochVector(0, 0, -0.5), params(4), PropagationConfig(0, 1, 0.01))


def test_norm_drift_abort():
    with pytest.raises(NormDriftError):
        integrate_meanfield(BlochVector.left_well(), params(100, u0=1.0), PropagationConfig(0, 5, 0.1))


# quantum vs classical ------------------------------------------------------

def _quantum_and_bloch(n, lam, t_end, dt=1e-3):
    p = params(n, u0=2 * lam / n)
    cfg = PropagationConfig(0, t_end, dt, record_stride=50, method="magnus4")
    return (propagate(left_well_state(n), p, "onsite", cfg),
            integrate_meanfield(BlochVector.left_well(), p, cfg))


def test_linear_case_quantum_equals_classical():
    q, b = _quantum_and_bloch(10, 0.0, 10)
    assert compare_quantum_classical(q, b, 10).max_deviation < 1e-6


def test_large_n_deviation_small_but_growing():
    q, b = _quantum_and_bloch(100, 0.5, 10)
    dev = compare_quantum_classical(q, b, 100)
    worst = np.maximum.reduce([dev.dev_x, dev.dev_y, dev.dev_z])
    early, late = worst[dev.times <= 1.0], worst[dev.times >= 5.0]
    assert early.max() < 1e-2
    assert late.max() > 3 * early.max()


def test_small_n_strong_interaction_breaks_meanfield():
    q, b = _quantum_and_bloch(2, 5.0, 30)
    assert compare_quantum_classical(q, b, 2).max_deviation > 0.5


def test_compare_resamples_classical_grid():
    q, _ = _quantum_and_bloch(10, 0.0, 4)
    coarse = integrate_meanfield(BlochVector.left_well(), params(10), PropagationConfig(0, 4, 1e-3, record_stride=1))
    dev = compare_quantum_classical(q, coarse, 10)
    assert dev.max_deviation < 1e-6
    assert dev.times.shape == q.times.shape


def test_compare_disjoint_ranges():
    q, _ = _quantum_and_bloch(4, 0.0, 1)
    far = ClassicalTrajectory(np.array([5.0, 6.0]), *(np.zeros(2) for _ in range(3)), np.ones(2))
    with pytest.raises(ValueError):
        compare_quantum_classical(q, far, 4)


def test_compare_empty():
    empty = TrajectoryRecord(*(np.array([]) for _ in range(7)))
    with pytest.raises(ValueError):
        compare_quantum_classical(empty, ClassicalTrajectory(*(np.zeros(1) for _ in range(5))), 4)
