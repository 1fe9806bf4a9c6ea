import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cxbohm.wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    NodeProximityError,
    ParameterError,
    PhysicalConstants,
    PlaneWave,
    PotentialStep,
    born_density,
    evaluate_psi,
    log_derivative,
    nodes,
    psi_derivative,
)

ALL = [
    HarmonicOscillator(n=0),
    HarmonicOscillator(n=1),
    HarmonicOscillator(n=2, alpha=1.3),
    PlaneWave(k=1.7, amplitude=0.5 - 0.2j),
    PotentialStep(E=0.5, V0=0.2),
    GaussianPacket(sigma=0.8, kbar=1.5),
]
NORMALIZABLE = [s for s in ALL if s.normalizable] + [GaussianPacket(sigma=1.0, kbar=1.0)]


def _quad_norm(s, t):
    lo, hi = -12.0 / min(1.0, getattr(s, "alpha", 1.0)), 12.0
    if isinstance(s, GaussianPacket):
        c, w = s.center(t), s.width(t)
        lo, hi = c - 12 * w, c + 12 * w
    val, _ = integrate.quad(lambda x: born_density(s, x, t), lo, hi, limit=200, epsabs=1e-12)
    return val


def test_examples_evaluate_psi():
    assert evaluate_psi(HarmonicOscillator(n=1), 0.0, 3.7) == 0
    assert evaluate_psi(PlaneWave(k=1.0), 0.0, 0.0) == 1
    # unit-norm ground state, peak value fixed by the normalization integral
    s = HarmonicOscillator(n=0)
    assert _quad_norm(s, 0.0) == pytest.approx(1.0, abs=1e-10)
    assert evaluate_psi(s, 0.0, 0.0) == pytest.approx(0.7511255444649425, abs=1e-15)


def test_examples_log_derivative():
    s0 = HarmonicOscillator(n=0)
    xs = np.array([0.3, -1.2 + 0.4j, 2.5j])
    np.testing.assert_allclose(log_derivative(s0, xs, 0.4), -xs, rtol=0, atol=1e-15)
    assert log_derivative(HarmonicOscillator(n=1), 1.0) == 0
    np.testing.assert_array_equal(log_derivative(PlaneWave(k=2.0), xs), 2j)


def test_examples_born_density():
    assert born_density(HarmonicOscillator(n=1), 0.0, 1.1) == 0
    assert born_density(HarmonicOscillator(n=0), 0.0) == pytest.approx(0.5641895835477563, abs=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.5, 2.0, 3.3])
def test_packet_density_peak_moves_with_group_velocity(t):
    s = GaussianPacket(sigma=1.0, kbar=1.0)
    x = np.linspace(t - 3, t + 3, 60001)
    assert x[np.argmax(born_density(s, x, t))] == pytest.approx(t, abs=2e-4)


def test_examples_nodes():
    assert nodes(HarmonicOscillator(n=0)) == []
    assert nodes(HarmonicOscillator(n=1)) == [0j]
    got = sorted(z.real for z in nodes(HarmonicOscillator(n=2)))
    # roots of 4X^2 - 2
    assert got == pytest.approx(sorted(np.roots([4, 0, -2]).real), abs=1e-15)
    assert nodes(PlaneWave()) == [] and nodes(GaussianPacket()) == []


@pytest.mark.parametrize("s", ALL, ids=lambda s: repr(s)[:40])
def test_log_derivative_matches_centered_differences_at_second_order(s):
    xs = np.array([-0.7 + 0.2j, 0.45 - 0.3j, 1.1 + 0.05j, -2.0 - 0.4j])
    t = 0.37
    L = log_derivative(s, xs, t)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (evaluate_psi(s, xs + h, t) - evaluate_psi(s, xs - h, t)) / (2 * h * evaluate_psi(s, xs, t))
        errs.append(np.max(np.abs(L - fd)))
    errs = np.array(errs)
    if errs[0] < 1e-11:  # linear phase: differences are exact up to rounding
        return
    ratios = errs[:-1] / errs[1:]
    assert np.all(ratios > 3.5) and np.all(ratios < 4.5)


@pytest.mark.parametrize("s", ALL, ids=lambda s: repr(s)[:40])
def test_dpsi_consistent_with_log_derivative(s):
    xs = np.array([-0.7 + 0.2j, 0.45 - 0.3j, 1.1 + 0.05j])
    np.testing.assert_allclose(psi_derivative(s, xs, 0.2), log_derivative(s, xs, 0.2) * evaluate_psi(s, xs, 0.2), rtol=1e-12)


@pytest.mark.parametrize("s", NORMALIZABLE, ids=lambda s: repr(s)[:40])
@pytest.mark.parametrize("t", [0.0, 2.5])
def test_normalization(s, t):
    assert _quad_norm(s, t) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("s", [HarmonicOscillator(n=1), HarmonicOscillator(n=2, alpha=0.7)])
def test_nodes_are_zeros(s):
    for z in nodes(s):
        assert abs(evaluate_psi(s, z, 1.0)) < 1e-12
        with pytest.raises(NodeProximityError) as info:
            log_derivative(s, z)
        assert info.value.node == z


def test_step_node_lattice_reported_on_error():
    s = PotentialStep(E=0.5, V0=0.25, reflection=1 / math.sqrt(2))
    z = s.nearest_node(-2.0 + 0.1j)
    assert abs(evaluate_psi(s, z)) < 1e-12
    with pytest.raises(NodeProximityError) as info:
        log_derivative(s, z)
    assert info.value.node == pytest.approx(z)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_eigenstate_density_stationary(n):
    s = HarmonicOscillator(n=n, alpha=1.2)
    x = np.linspace(-4, 4, 101)
    p0 = born_density(s, x, 0.0)
    for t in (0.3, 1.7, 11.0):
        np.testing.assert_allclose(born_density(s, x, t), p0, rtol=0, atol=1e-12)


def test_step_coefficients_match_at_boundary():
    s = PotentialStep(E=0.7, V0=0.3, constants=PhysicalConstants(hbar=1.2, mass=0.8))
    eps = 1e-9
    assert evaluate_psi(s, -eps) == pytest.approx(evaluate_psi(s, 0.0), abs=1e-8)
    assert psi_derivative(s, -eps) == pytest.approx(psi_derivative(s, 0.0), abs=1e-8)
    assert s.R == pytest.approx((s.k - s.q) / (s.k + s.q)) and s.T == pytest.approx(2 * s.k / (s.k + s.q))


@pytest.mark.parametrize(
    "make",
    [
        lambda: HarmonicOscillator(alpha=-1.0),
        lambda: HarmonicOscillator(n=3),
        lambda: PotentialStep(E=0.2, V0=0.5),
        lambda: PotentialStep(E=1.0, V0=0.0),
        lambda: GaussianPacket(sigma=0.0),
        lambda: PlaneWave(amplitude=0),
        lambda: PhysicalConstants(hbar=0.0),
        lambda: PhysicalConstants(mass=-1.0),
    ],
)
def test_parameter_domain_errors(make):
    with pytest.raises(ParameterError):
        make()


@settings(max_examples=60, deadline=None)
@given(
    re=st.floats(-3, 3),
    im=st.floats(-1.5, 1.5),
    t=st.floats(0, 5),
    n=st.sampled_from([0, 1, 2]),
)
def test_ho_log_derivative_property(re, im, t, n):
    s = HarmonicOscillator(n=n)
    x = complex(re, im)
    if s.node_measure(np.array([x]), t)[0] < 1e-6:
        return
    h = 1e-5
    fd = (evaluate_psi(s, x + h, t) - evaluate_psi(s, x - h, t)) / (2 * h * evaluate_psi(s, x, t))
    assert abs(log_derivative(s, x, t) - fd) < 1e-5 * (1 + abs(fd))
