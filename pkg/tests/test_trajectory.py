import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cxbohm import _kernels
from cxbohm.oracles import analytic_trajectory, conserved_value
from cxbohm.trajectory import (
    IntegratorConfig,
    TrajectoryStatus,
    complex_velocity,
    integrate_real_flow,
    integrate_trajectory,
    real_axis_velocity,
)
from cxbohm.wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    NodeProximityError,
    PlaneWave,
    PotentialStep,
)


def test_complex_velocity_examples():
    assert complex_velocity(HarmonicOscillator(n=0), 1.0) == pytest.approx(1j)
    assert complex_velocity(PlaneWave(k=2.5), 0.3 + 0.1j, 4.0) == pytest.approx(2.5)
    s = HarmonicOscillator(n=1)
    # stagnation points at X = +-1
    assert abs(complex_velocity(s, 1.0)) < 1e-15 and abs(complex_velocity(s, -1.0)) < 1e-15
    with pytest.raises(NodeProximityError):
        complex_velocity(s, 0.0)


def test_real_axis_velocity_examples():
    np.testing.assert_array_equal(real_axis_velocity(HarmonicOscillator(n=2), np.array([0.3, 1.5, -2.0])), 0.0)
    step = PotentialStep(E=0.5, V0=0.25)
    np.testing.assert_allclose(real_axis_velocity(step, np.array([0.1, 2.0, 7.5]), 3.0), step.q, rtol=0, atol=1e-15)
    g = GaussianPacket()
    # packet center moves at hbar kbar/m
    assert real_axis_velocity(g, g.center(1.5), 1.5) == pytest.approx(1.0, abs=1e-14)


def test_kernel_matches_vectorized_field():
    xs = np.array([0.4 + 0.3j, -1.1 + 0.2j, 2.0 - 0.7j])
    for s in (HarmonicOscillator(n=1, alpha=1.4), PotentialStep(E=0.6, V0=0.2), GaussianPacket(sigma=0.7, kbar=-0.5), PlaneWave(k=0.3)):
        kind, p = s.kernel_args()
        for x in xs:
            assert _kernels.velocity(kind, p, x, 0.8) == pytest.approx(complex_velocity(s, x, 0.8), rel=1e-13)


def test_sampling_contract():
    s = HarmonicOscillator(n=0)
    T = np.linspace(0.5, 3.0, 6)
    tr = integrate_trajectory(s, 1.0, (0.0, 3.0), t_eval=T)
    assert tr.t[0] == 0.0 and tr.x[0] == 1.0 and len(tr) == 7
    assert np.all(np.diff(tr.t) > 0)
    assert tr.completed and tr.accepted_steps > 0
    assert tr.samples[0] == (0.0, 1 + 0j)


def test_t_eval_validation():
    s = HarmonicOscillator(n=0)
    with pytest.raises(ValueError):
        integrate_trajectory(s, 1.0, (0.0, 1.0), t_eval=[0.0, 0.5, 0.4])
    with pytest.raises(ValueError):
        integrate_trajectory(s, 1.0, (0.0, 1.0), t_eval=[0.0, 2.0])
    with pytest.raises(ValueError):
        integrate_trajectory(s, 1.0, (0.0, 0.0))
    with pytest.raises(ValueError):
        integrate_trajectory(s, 1.0, (0.0, 1.0), IntegratorConfig(max_samples=3), t_eval=np.linspace(0, 1, 5))


def test_initial_condition_on_node_raises():
    with pytest.raises(NodeProximityError):
        integrate_trajectory(HarmonicOscillator(n=1), 0.0, (0.0, 1.0))


def test_trajectory_into_node_aborts_with_partial_output():
    # X0 = sqrt(2): Q = 1, X^2 = 1 + e^{2it} vanishes at t = pi/2
    s = HarmonicOscillator(n=1)
    T = np.linspace(0.0, 3.0, 301)
    # in floating point the separatrix is missed by ~1e-8; a coarse min_step
    # makes the close pass count as a node hit
    tr = integrate_trajectory(s, math.sqrt(2), (0.0, 3.0), IntegratorConfig(min_step=1e-8), t_eval=T)
    assert tr.status is TrajectoryStatus.ABORTED_AT_NODE
    assert 1 < len(tr) < len(T)
    assert 1.5 < tr.t[-1] <= math.pi / 2
    assert np.all(np.isfinite(tr.x))


def test_start_next_to_node_aborts():
    tr = integrate_trajectory(HarmonicOscillator(n=1), 1e-6, (0.0, 1.0), t_eval=[0.0, 0.5, 1.0])
    assert tr.status is TrajectoryStatus.ABORTED_AT_NODE
    assert len(tr) == 1 and tr.x[0] == 1e-6


def test_max_steps_reports_underflow():
    tr = integrate_trajectory(HarmonicOscillator(n=0), 1.0, (0.0, 100.0), IntegratorConfig(max_steps=20))
    assert tr.status is TrajectoryStatus.STEP_UNDERFLOW


def test_tightening_tolerance_reduces_error():
    s = HarmonicOscillator(n=0)
    T = np.linspace(0, 10, 51)
    exact = analytic_trajectory(s, 2.0, T)
    errs = []
    for rtol in (1e-5, 1e-7, 1e-9, 1e-11):
        tr = integrate_trajectory(s, 2.0, (0, 10), IntegratorConfig(rel_tol=rtol, abs_tol=rtol * 1e-3), t_eval=T)
        errs.append(np.max(np.abs(tr.x - exact)))
    assert all(a > b for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("s,x0", [(HarmonicOscillator(n=1), 1.45), (GaussianPacket(), 1 + 1j), (HarmonicOscillator(n=2), 1.9)])
def test_time_reversal(s, x0):
    fwd = integrate_trajectory(s, x0, (0.0, 2.0))
    back = integrate_trajectory(s, fwd.x[-1], (2.0, 0.0))
    assert np.all(np.diff(back.t) < 0)
    assert abs(back.x[-1] - x0) < 1e-7


def test_stagnation_point_is_fixed():
    s = HarmonicOscillator(n=1)
    tr = integrate_trajectory(s, 1.0 + 0j, (0.0, 5.0))
    assert np.max(np.abs(tr.x - 1.0)) < 1e-14


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.3, 3.0), phi=st.floats(0, 2 * math.pi), t1=st.floats(0.5, 8.0))
def test_circle_law_property(r, phi, t1):
    x0 = r * complex(math.cos(phi), math.sin(phi))
    tr = integrate_trajectory(HarmonicOscillator(n=0), x0, (0.0, t1))
    assert np.max(np.abs(np.abs(tr.x) - r)) < 1e-8 * max(1.0, r)


@settings(max_examples=20, deadline=None)
@given(re=st.floats(-2, 2), im=st.floats(-2, 2))
def test_packet_conservation_property(re, im):
    s = GaussianPacket(sigma=0.9, kbar=1.3)
    T = np.linspace(0, 4, 41)
    tr = integrate_trajectory(s, complex(re, im), (0.0, 4.0), t_eval=T)
    q = conserved_value(s, tr.x, tr.t)
    assert np.max(np.abs(q - q[0])) < 1e-6


def test_real_flow_matches_closed_form():
    from cxbohm.oracles import analytic_real_flow

    g = GaussianPacket(sigma=1.2, kbar=0.8)
    x0 = np.linspace(-3, 3, 25)
    x1, status = integrate_real_flow(g, x0, 0.0, 2.5)
    assert np.all(status == "completed")
    np.testing.assert_allclose(x1, analytic_real_flow(g, x0, 2.5), atol=1e-8)


def test_real_flow_stationary_for_eigenstates():
    x0 = np.array([-1.0, 0.3, 2.0])
    x1, status = integrate_real_flow(HarmonicOscillator(n=2), x0, 0.0, 3.0)
    np.testing.assert_allclose(x1, x0, rtol=0, atol=1e-12)
    assert np.all(status == "completed")


def test_spec_examples_integrate():
    tr = integrate_trajectory(PlaneWave(k=1.0), 0.0, (0.0, 5.0))
    assert abs(tr.x[-1] - 5.0) < 1e-9
    tr = integrate_trajectory(HarmonicOscillator(n=0), 1.0, (0.0, math.pi))
    assert abs(tr.x[-1] + 1.0) < 1e-6


def test_packet_real_axis_velocity_value():
    # flow x = kbar tau + x0 sqrt(1 + tau^2): the particle at 0 when t = 1 left
    # x0 = -1/sqrt(2), so v = 1 - (1/sqrt 2)(1/sqrt 2) = 1/2
    g = GaussianPacket(sigma=1.0, kbar=1.0)
    assert real_axis_velocity(g, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert complex_velocity(g, 0.0 + 0j, 1.0).real == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("s,X", [(HarmonicOscillator(n=1, alpha=1.7), 1.0), (HarmonicOscillator(n=2, alpha=0.6), math.sqrt(2.5))])
def test_stagnation_points(s, X):
    for sign in (1, -1):
        assert abs(complex_velocity(s, sign * X / s.alpha, 0.3)) < 1e-14


def test_time_reversal_within_error_bound():
    s = HarmonicOscillator(n=0)
    x0 = 1.3 + 0.4j
    fwd = integrate_trajectory(s, x0, (0.0, 4.0))
    one_way = abs(fwd.x[-1] - analytic_trajectory(s, x0, 4.0))
    back = integrate_trajectory(s, fwd.x[-1], (4.0, 0.0))
    assert abs(back.x[-1] - x0) < 10 * max(one_way, 1e-15)
