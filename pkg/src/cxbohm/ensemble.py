"""Born-rule ensembles on the real axis and the equivalence checks.

Positions are drawn from Psi* Psi by inverse-CDF sampling on a tabulated
cumulative quadrature, transported with the real-axis velocity field, and
compared against direct quadrature of the density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, stats

from .trajectory import IntegratorConfig, TrajectoryStatus, integrate_real_flow, real_axis_velocity
from .wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    Scenario,
    UnsupportedScenarioError,
    born_density,
)

__all__ = [
    "RNG_ALGORITHM",
    "TABLE_POINTS",
    "EnsembleSnapshot",
    "ResidualGrid",
    "ExpectationResult",
    "real_axis_support",
    "born_cdf_table",
    "sample_born",
    "evolve_real_ensemble",
    "continuity_residual",
    "continuity_convergence",
    "expectation_value",
    "quadrature_expectation",
    "equivariance_ks",
]

RNG_ALGORITHM = "PCG64"
TABLE_POINTS = 2048
SUPPORT_WIDTHS = 10.0


@dataclass
class EnsembleSnapshot:
    scenario: Scenario
    t: float
    positions: np.ndarray
    seed: int
    status: np.ndarray | None = field(default=None, repr=False)
    rng: str = RNG_ALGORITHM

    @property
    def n(self):
        return self.positions.size

    @property
    def ok(self):
        """Mask of particles that were transported without a node abort."""
        if self.status is None:
            return np.ones(self.n, dtype=bool)
        return self.status == TrajectoryStatus.COMPLETED.value


@dataclass
class ResidualGrid:
    x: np.ndarray
    t: float
    residuals: np.ndarray
    h_x: float
    h_t: float

    @property
    def max_norm(self):
        return float(np.max(np.abs(self.residuals)))


class ExpectationResult(NamedTuple):
    mc_estimate: float
    quadrature: float
    mc_std_error: float


def _require_normalizable(s: Scenario):
    if not s.normalizable:
        raise UnsupportedScenarioError(f"{type(s).__name__} is not normalizable; Born sampling is undefined")


def real_axis_support(s: Scenario, t: float, widths: float = SUPPORT_WIDTHS):
    """Interval holding all but a negligible tail of the Born density."""
    _require_normalizable(s)
    if isinstance(s, HarmonicOscillator):
        center, sd = 0.0, math.sqrt(s.n + 0.5) / s.alpha
    elif isinstance(s, GaussianPacket):
        center, sd = s.center(t), s.width(t)
    else:  # pragma: no cover - guarded above
        raise UnsupportedScenarioError(type(s).__name__)
    return center - widths * sd, center + widths * sd


def born_cdf_table(s: Scenario, t: float, points: int = TABLE_POINTS):
    """(grid, density, cumulative) with trapezoid cumulative quadrature."""
    lo, hi = real_axis_support(s, t)
    x = np.linspace(lo, hi, points)
    p = born_density(s, x, t)
    c = integrate.cumulative_trapezoid(p, x, initial=0.0)
    return x, p, c


def _invert_table(x, p, c, u):
    # density is linear within each bin, so the cumulative is quadratic there
    u = u * c[-1]
    i = np.clip(np.searchsorted(c, u, side="right") - 1, 0, len(x) - 2)
    h = x[i + 1] - x[i]
    p0 = p[i]
    slope = (p[i + 1] - p0) / h
    r = u - c[i]
    disc = np.sqrt(np.maximum(p0 * p0 + 2 * slope * r, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(p0 + disc > 0, 2 * r / (p0 + disc), 0.0)
    return x[i] + np.clip(s, 0.0, h)


def sample_born(s: Scenario, t0: float, n: int, seed: int) -> EnsembleSnapshot:
    """n independent draws from the Born density at t0, reproducible from seed."""
    _require_normalizable(s)
    if n < 1:
        raise ValueError("sample size must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    x, p, c = born_cdf_table(s, t0)
    pos = _invert_table(x, p, c, rng.random(n))
    return EnsembleSnapshot(s, float(t0), pos, seed)


def evolve_real_ensemble(e: EnsembleSnapshot, t1: float, cfg: IntegratorConfig | None = None) -> EnsembleSnapshot:
    """Transport every position along dx_r/dt = real_axis_velocity to t1.

    Particles that hit a node are kept at their last position and flagged in
    ``status``; they are not dropped.
    """
    if t1 < e.t:
        raise ValueError("ensembles are only evolved forward in time")
    ok = e.ok
    pos = e.positions.copy()
    status = np.full(e.n, TrajectoryStatus.COMPLETED.value, dtype="U16") if e.status is None else e.status.copy()
    if np.any(ok):
        pos[ok], status[ok] = integrate_real_flow(e.scenario, e.positions[ok], e.t, t1, cfg)
    return replace(e, t=float(t1), positions=pos, status=status)


def continuity_residual(s: Scenario, grid, t: float, h_t: float) -> ResidualGrid:
    """dP/dt + d(P v_r)/dx_r by centered differences on a uniform grid.

    ``grid`` is ``(lo, hi, points)``; residuals are reported on interior
    points.  The grid must keep at least one spacing away from real nodes.
    """
    lo, hi, npts = grid
    x = np.linspace(lo, hi, int(npts))
    h_x = x[1] - x[0]
    for node in s.nodes(t):
        if abs(node.imag) < h_x and np.min(np.abs(x - node.real)) < h_x:
            raise ValueError(f"grid passes within one spacing of the node at {node}")
    P = np.asarray(born_density(s, x, t))
    J = P * np.asarray(real_axis_velocity(s, x, t))
    dP = (np.asarray(born_density(s, x, t + h_t)) - np.asarray(born_density(s, x, t - h_t))) / (2 * h_t)
    dJ = (J[2:] - J[:-2]) / (2 * h_x)
    return ResidualGrid(x[1:-1], float(t), dP[1:-1] + dJ, float(h_x), float(h_t))


def continuity_convergence(s: Scenario, t: float, span, h0: float, levels: int = 4, ratio: float = 1.0):
    """Max continuity residual under joint refinement h_x = h, h_t = ratio h.

    Returns (h values, max residuals, fitted log-log slope).
    """
    lo, hi = span
    hs, res = [], []
    for j in range(levels):
        h = h0 / 2**j
        npts = int(round((hi - lo) / h)) + 1
        g = continuity_residual(s, (lo, hi, npts), t, ratio * h)
        hs.append(g.h_x)
        res.append(g.max_norm)
    hs, res = np.array(hs), np.array(res)
    slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
    return hs, res, float(slope)


def quadrature_expectation(s: Scenario, observable: Callable, t: float) -> float:
    """Integral of P(x_r, t) O(x_r) over the real line by adaptive quadrature."""
    _require_normalizable(s)
    lo, hi = real_axis_support(s, t, widths=14.0)
    pts = [node.real for node in s.nodes(t) if lo < node.real < hi] or None
    val, _ = integrate.quad(
        lambda x: born_density(s, x, t) * observable(x), lo, hi, points=pts, limit=400, epsabs=1e-13, epsrel=1e-11
    )
    return float(val)


def expectation_value(
    s: Scenario,
    observable: Callable,
    t: float,
    n: int,
    seed: int,
    t0: float = 0.0,
    cfg: IntegratorConfig | None = None,
) -> ExpectationResult:
    """Ensemble average of O over Born samples drawn at t0 and carried to t.

    The quadrature value is the direct integral of P O at time t; the two
    should agree within a few ``mc_std_error``.
    """
    e = sample_born(s, t0, n, seed)
    if t != t0:
        e = evolve_real_ensemble(e, t, cfg)
    vals = np.asarray(observable(e.positions[e.ok]), dtype=np.float64)
    mc = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size))
    return ExpectationResult(mc, quadrature_expectation(s, observable, t), se)


def equivariance_ks(
    s: Scenario, t0: float, t1: float, n: int, seed_evolved: int, seed_direct: int, cfg: IntegratorConfig | None = None
):
    """Two-sample KS test: (Born at t0, transported to t1) vs (Born at t1)."""
    moved = evolve_real_ensemble(sample_born(s, t0, n, seed_evolved), t1, cfg)
    direct = sample_born(s, t1, n, seed_direct)
    return stats.ks_2samp(moved.positions[moved.ok], direct.positions)
