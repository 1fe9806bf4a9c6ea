"""Closed-form trajectories, constants of motion and residual checks.

These are the ground truth the integrator is verified against.  All
derivatives are hand-derived from the catalog closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    ParameterError,
    PlaneWave,
    PotentialStep,
    Scenario,
    UnsupportedScenarioError,
    _as_complex,
    _check_node,
    _ret,
)

__all__ = [
    "ConservedQuantity",
    "NoClosedFormError",
    "analytic_trajectory",
    "analytic_real_flow",
    "constant_of_motion",
    "conserved_value",
    "conserved_tag",
    "step_contour_value",
    "step_contour_value_same_sign",
    "step_contour_supremum",
    "quantum_hj_residual",
]


class NoClosedFormError(UnsupportedScenarioError):
    """No explicit x(t); use ``constant_of_motion`` instead."""


@dataclass(frozen=True)
class ConservedQuantity:
    scenario: Scenario
    definition: str
    value: complex


def _ho_phase(s: HarmonicOscillator, t, mult):
    return np.exp(-1j * mult * s.omega * np.asarray(t))


def conserved_tag(s: Scenario, x=None) -> str:
    if isinstance(s, HarmonicOscillator):
        return f"HO{s.n}"
    if isinstance(s, PotentialStep):
        return "STEP" if x is None or complex(x).real < 0 else "STEP-II"
    if isinstance(s, GaussianPacket):
        return "PACKET"
    return "PLANE"


def conserved_value(s: Scenario, x, t=0.0):
    """Q(x, t), constant along every exact trajectory (vectorized).

    ===========  ======================================================
    HO n=0       x e^{-i w t}
    HO n=1       (X^2 - 1) e^{-2 i w t},      X = alpha x, w = hbar alpha^2/m
    HO n=2       X (X^2 - 5/2)^2 e^{-5 i w t}
    plane wave   x - hbar k t / m
    step, x<0    (e^{ikx} - R e^{-ikx}) e^{-i hbar k^2 t / m}
    step, x>=0   x - hbar q t / m
    packet       (x - i sigma^2 kbar) / (sigma^2 + i hbar t / m)
    ===========  ======================================================
    """
    x = _as_complex(x)
    if isinstance(s, HarmonicOscillator):
        X = s.alpha * x
        if s.n == 0:
            q = x * _ho_phase(s, t, 1)
        elif s.n == 1:
            q = (X**2 - 1) * _ho_phase(s, t, 2)
        else:
            q = X * (X**2 - 2.5) ** 2 * _ho_phase(s, t, 5)
    elif isinstance(s, PlaneWave):
        q = x - s.hbar * s.k * np.asarray(t) / s.mass
    elif isinstance(s, PotentialStep):
        left = x.real < 0
        k = s.k
        with np.errstate(over="ignore", invalid="ignore"):
            q1 = (np.exp(1j * k * x) - s.R * np.exp(-1j * k * x)) * np.exp(-1j * s.hbar * k**2 * np.asarray(t) / s.mass)
        q2 = x - s.hbar * s.q * np.asarray(t) / s.mass
        q = np.where(left, q1, q2)
    elif isinstance(s, GaussianPacket):
        q = (x - 1j * s.sigma**2 * s.kbar) / (s.sigma**2 + 1j * s.hbar * np.asarray(t) / s.mass)
    else:
        raise UnsupportedScenarioError(f"no constant of motion for {type(s).__name__}")
    return _ret(np.asarray(q))


def constant_of_motion(s: Scenario, x: complex, t: float = 0.0) -> ConservedQuantity:
    return ConservedQuantity(s, conserved_tag(s, x), complex(conserved_value(s, complex(x), t)))


def _ho1_tracked(s: HarmonicOscillator, x0: complex, t: np.ndarray) -> np.ndarray:
    # sqrt(1 + A e^{2iwt}) / alpha, branch followed continuously from x0
    X0 = s.alpha * x0
    A = X0**2 - 1
    gap = abs(abs(A) - 1)
    if gap == 0:
        raise ParameterError("trajectory runs into the node at x = 0")
    w2 = 2 * s.omega
    dphase = min(0.05, 0.2 * gap / max(abs(A), 1e-300))
    out = np.empty(t.shape, dtype=np.complex128)
    for sign in (1.0, -1.0):
        sel = np.flatnonzero(sign * t >= 0) if sign > 0 else np.flatnonzero(t < 0)
        if sel.size == 0:
            continue
        tau = sign * t[sel]
        tmax = tau.max()
        nstep = max(1, math.ceil(w2 * tmax / dphase))
        grid = np.union1d(np.linspace(0.0, tmax, nstep + 1), tau)
        r = np.sqrt(1 + A * np.exp(1j * w2 * sign * grid))
        tracked = np.empty_like(r)
        prev = X0
        for i, ri in enumerate(r):
            prev = ri if abs(ri - prev) <= abs(ri + prev) else -ri
            tracked[i] = prev
        out[sel] = tracked[np.searchsorted(grid, tau)] / s.alpha
    return out


def analytic_trajectory(s: Scenario, x0: complex, t):
    """Closed-form x(t) through x0 at t = 0.

    HO n=0:  x0 e^{i w t};  HO n=1: branch-tracked sqrt(1 + A e^{2iwt})/alpha
    with A = X0^2 - 1;  plane wave: x0 + hbar k t/m;  packet:
    i sigma^2 kbar + (x0 - i sigma^2 kbar)(1 + i hbar t/(m sigma^2)).
    """
    x0 = complex(x0)
    t_arr = np.asarray(t, dtype=np.float64)
    _check_node(s, x0, 0.0)
    if isinstance(s, HarmonicOscillator):
        if s.n == 0:
            out = x0 * np.exp(1j * s.omega * t_arr)
        elif s.n == 1:
            out = _ho1_tracked(s, x0, np.atleast_1d(t_arr)).reshape(t_arr.shape)
        else:
            raise NoClosedFormError("HO n=2 has only the implicit solution; use constant_of_motion")
    elif isinstance(s, PlaneWave):
        out = x0 + s.hbar * s.k * t_arr / s.mass + 0j
    elif isinstance(s, GaussianPacket):
        c = 1j * s.sigma**2 * s.kbar
        out = c + (x0 - c) * (1 + 1j * s.hbar * t_arr / (s.mass * s.sigma**2))
    else:
        raise NoClosedFormError(f"no explicit trajectory for {type(s).__name__}; use constant_of_motion")
    return _ret(np.asarray(out))


def analytic_real_flow(s: Scenario, x0, t):
    """Exact solution of the real-axis flow for HO eigenstates and the packet."""
    x0 = np.asarray(x0, dtype=np.float64)
    if isinstance(s, HarmonicOscillator):
        return _ret(np.array(x0, copy=True))
    if isinstance(s, GaussianPacket):
        tau = s.hbar * t / s.mass
        return _ret(s.kbar * tau + x0 * math.sqrt(1 + tau**2 / s.sigma**4))
    raise NoClosedFormError(f"no real-axis flow solution for {type(s).__name__}")


def step_contour_value(x, k: float, R: float):
    """Trajectory contour function of the step's incident region.

    c = 2R cos(2k x_r) - e^{-2k x_i} - R^2 e^{2k x_i} = -|e^{ikx} - R e^{-ikx}|^2,
    constant along every region-I trajectory.
    """
    x = _as_complex(x)
    if np.any(x.real >= 0):
        raise ParameterError("contour function is defined for Re(x) < 0 only")
    xr, xi = x.real, x.imag
    return _ret(2 * R * np.cos(2 * k * xr) - np.exp(-2 * k * xi) - R**2 * np.exp(2 * k * xi))


def step_contour_value_same_sign(x, k: float):
    """The r = 1/2 contour expression with both exponentials e^{+2k x_i}.

    Kept for comparison only; it is not conserved along trajectories.
    """
    x = _as_complex(x)
    xr, xi = x.real, x.imag
    return _ret(math.sqrt(2) * np.cos(2 * k * xr) - np.exp(2 * k * xi) - 0.5 * np.exp(2 * k * xi))


def step_contour_supremum(k: float, R: float):
    """(sup c, argmax) over Re(x) < 0: c = 0 at the stagnation points."""
    xi = -math.log(R) / (2 * k)
    return 0.0, complex(-math.pi / k, xi)


def quantum_hj_residual(s: Scenario, x, t: float = 0.0):
    """S_t + S_x^2/(2m) + V - (i hbar/2m) S_xx with S = -i hbar log(Psi/N).

    Vanishes identically for every catalog wavefunction.
    """
    _check_node(s, x, t)
    hbar, m = s.hbar, s.mass
    S_t = -1j * hbar * s.log_derivative_dt(x, t)
    S_x = -1j * hbar * s.log_derivative(x, t)
    S_xx = -1j * hbar * s.log_derivative_dx(x, t)
    return _ret(S_t + S_x**2 / (2 * m) + s.potential(x) - (1j * hbar / (2 * m)) * S_xx)
