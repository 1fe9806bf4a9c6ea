import numpy as np
import pytest
from scipy import stats

from cxbohm.ensemble import (
    TABLE_POINTS,
    born_cdf_table,
    continuity_convergence,
    continuity_residual,
    evolve_real_ensemble,
    expectation_value,
    quadrature_expectation,
    sample_born,
)
from cxbohm.wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    PlaneWave,
    PotentialStep,
    UnsupportedScenarioError,
)


def test_determinism():
    s = GaussianPacket()
    a = sample_born(s, 0.0, 1000, 42)
    b = sample_born(s, 0.0, 1000, 42)
    assert np.array_equal(a.positions, b.positions)
    assert a.seed == 42 and a.rng == "PCG64"
    assert not np.array_equal(a.positions, sample_born(s, 0.0, 1000, 43).positions)


def test_unsupported_scenarios():
    for s in (PlaneWave(), PotentialStep()):
        with pytest.raises(UnsupportedScenarioError):
            sample_born(s, 0.0, 10, 1)
        with pytest.raises(UnsupportedScenarioError):
            expectation_value(s, lambda x: x, 0.0, 10, 1)
    with pytest.raises(ValueError):
        sample_born(HarmonicOscillator(), 0.0, 0, 1)


def test_cdf_table_shape():
    x, p, c = born_cdf_table(HarmonicOscillator(n=1), 0.0)
    assert len(x) == TABLE_POINTS
    assert np.all(np.diff(c) >= 0)
    assert c[-1] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("s", [HarmonicOscillator(n=0), HarmonicOscillator(n=2, alpha=1.5), GaussianPacket(sigma=0.5, kbar=2.0)])
def test_samples_follow_born_density(s):
    from scipy import integrate

    from cxbohm.wavefunctions import born_density

    e = sample_born(s, 0.7, 20000, 7)

    def cdf(x):
        return np.array([integrate.quad(lambda u: born_density(s, u, 0.7), -40, xi, limit=200)[0] for xi in np.atleast_1d(x)])

    grid = np.linspace(e.positions.min(), e.positions.max(), 400)
    F = cdf(grid)
    ks = stats.kstest(e.positions, lambda x: np.interp(x, grid, F))
    assert ks.pvalue > 0.01


def test_evolution_of_eigenstate_is_static():
    e = sample_born(HarmonicOscillator(n=1), 0.0, 500, 3)
    e1 = evolve_real_ensemble(e, 2.0)
    np.testing.assert_allclose(e1.positions, e.positions, atol=1e-12)
    assert e1.ok.all() and e1.t == 2.0
    # particles never cross the node at 0
    assert np.all(np.sign(e1.positions) == np.sign(e.positions))


def test_evolution_preserves_order_and_rejects_backward():
    g = GaussianPacket()
    e = sample_born(g, 0.0, 2000, 11)
    e1 = evolve_real_ensemble(e, 3.0)
    order = np.argsort(e.positions)
    assert np.all(np.diff(e1.positions[order]) > 0)
    with pytest.raises(ValueError):
        evolve_real_ensemble(e1, 1.0)


def test_wide_packet_mean_displacement():
    g = GaussianPacket(sigma=5.0, kbar=1.0)
    r = expectation_value(g, lambda x: x, 3.0, 5000, 5)
    assert r.quadrature == pytest.approx(3.0, abs=1e-9)
    assert abs(r.mc_estimate - r.quadrature) < 4 * r.mc_std_error


def test_expectation_examples():
    ho = HarmonicOscillator(n=0)
    r = expectation_value(ho, lambda x: x, 1.0, 20000, 17)
    assert r.quadrature == pytest.approx(0.0, abs=1e-12)
    assert abs(r.mc_estimate) < 4 * r.mc_std_error
    assert quadrature_expectation(ho, lambda x: x**2, 0.0) == pytest.approx(0.5, abs=1e-10)
    assert quadrature_expectation(GaussianPacket(), lambda x: x, 2.0) == pytest.approx(2.0, abs=1e-10)


def test_continuity_examples():
    assert continuity_residual(PlaneWave(k=1.5), (-5, 5, 101), 0.4, 0.01).max_norm < 1e-12
    assert continuity_residual(HarmonicOscillator(n=0), (-5, 5, 101), 0.4, 0.01).max_norm < 1e-12
    with pytest.raises(ValueError):
        continuity_residual(HarmonicOscillator(n=1), (-1, 1, 101), 0.0, 0.01)


def test_continuity_order():
    hs, res, slope = continuity_convergence(GaussianPacket(), 0.5, (-5.0, 6.0), 0.1, levels=4)
    assert np.all(np.diff(res) < 0)
    assert abs(slope - 2.0) <= 0.2


def test_concurrency_does_not_change_results():
    g = GaussianPacket()
    e = sample_born(g, 0.0, 300, 9)
    a = evolve_real_ensemble(e, 1.5).positions
    # chunked evolution gives the same answer as one batch
    parts = [evolve_real_ensemble(type(e)(g, 0.0, e.positions[i::3], 9), 1.5).positions for i in range(3)]
    b = np.empty_like(a)
    for i in range(3):
        b[i::3] = parts[i]
    np.testing.assert_array_equal(a, b)
