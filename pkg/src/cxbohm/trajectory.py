"""Complex velocity field and adaptive trajectory integration.

The equation of motion is m dx/dt = (hbar/i) (1/Psi) dPsi/dx with complex x.
Trajectories are integrated with an embedded Dormand-Prince 5(4) pair under
PI step control; the complex state is advanced as its two real components
sharing one error scale.  Output at requested times uses the pair's quartic
continuous extension on the accepted-step mesh.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import HAS_NUMBA
from .wavefunctions import NODE_TOL, NodeProximityError, Scenario, _ret, log_derivative

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "TrajectoryStatus",
    "complex_velocity",
    "real_axis_velocity",
    "integrate_trajectory",
    "integrate_real_flow",
    "dense_output",
]


class TrajectoryStatus(str, enum.Enum):
    COMPLETED = "completed"
    ABORTED_AT_NODE = "aborted-at-node"
    STEP_UNDERFLOW = "step-underflow"


_STATUS = {
    _kernels.STATUS_COMPLETED: TrajectoryStatus.COMPLETED,
    _kernels.STATUS_NODE: TrajectoryStatus.ABORTED_AT_NODE,
    _kernels.STATUS_UNDERFLOW: TrajectoryStatus.STEP_UNDERFLOW,
}


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step limits.

    ``max_samples`` bounds the number of output samples a caller may request;
    ``max_steps`` bounds accepted plus rejected steps, after which the run
    stops with status ``step-underflow``.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    initial_step: float = 1e-3
    min_step: float = 1e-12
    max_samples: int = 1_000_000
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.min_step < self.initial_step):
            raise ValueError("need 0 < min_step < initial_step")
        if self.max_samples < 1 or self.max_steps < 1:
            raise ValueError("max_samples and max_steps must be positive")


@dataclass
class Trajectory:
    """Samples (t, x) of one complex path plus integrator diagnostics.

    Sample times are strictly monotone in the direction of integration and
    the first sample is the initial condition.
    """

    scenario: Scenario
    t: np.ndarray
    x: np.ndarray
    status: TrajectoryStatus
    accepted_steps: int
    rejected_steps: int

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.x.tolist()))

    @property
    def completed(self):
        return self.status is TrajectoryStatus.COMPLETED

    def __len__(self):
        return len(self.t)


def complex_velocity(s: Scenario, x, t: float = 0.0):
    """dx/dt = (hbar / (i m)) (1/Psi) dPsi/dx."""
    return _ret(np.asarray(-1j * (s.hbar / s.mass) * np.asarray(log_derivative(s, x, t))))


def real_axis_velocity(s: Scenario, x_r, t: float = 0.0):
    """Real-axis flow (hbar/2im)[Psi* Psi' - Psi'* Psi] / (Psi* Psi) at real x_r."""
    x_r = np.asarray(x_r, dtype=np.float64)
    if np.any(s.node_measure(x_r.astype(np.complex128), t) < NODE_TOL):
        raise NodeProximityError("real-axis velocity requested at a node of Psi")
    ps = s.psi(x_r, t)
    dps = s.dpsi(x_r, t)
    num = np.conj(ps) * dps - np.conj(dps) * ps
    den = ps.real**2 + ps.imag**2
    if np.any(den == 0):
        raise NodeProximityError("Born density underflows to zero")
    return _ret((s.hbar / (2j * s.mass) * num / den).real)


def dense_output(t_mesh, x_mesh, f_mesh, d_mesh, t_query):
    """Evaluate the DOPRI5 continuous extension at ``t_query``.

    On each accepted interval [t_i, t_i + h] with theta = (t - t_i)/h::

        x = x_i + theta (r2 + (1-theta)(r3 + theta (r4 + (1-theta) d_i)))

    where r2 = x_{i+1} - x_i, r3 = h f_i - r2, r4 = r2 - h f_{i+1} - r3.
    """
    t_mesh = np.asarray(t_mesh)
    t_query = np.asarray(t_query, dtype=np.float64)
    if len(t_mesh) == 1:
        return np.full(t_query.shape, x_mesh[0], dtype=np.complex128)
    sign = 1.0 if t_mesh[-1] >= t_mesh[0] else -1.0
    tm = sign * t_mesh
    tq = sign * t_query
    i = np.clip(np.searchsorted(tm, tq, side="right") - 1, 0, len(tm) - 2)
    h = t_mesh[i + 1] - t_mesh[i]
    th = (t_query - t_mesh[i]) / h
    th1 = 1 - th
    r2 = x_mesh[i + 1] - x_mesh[i]
    r3 = h * f_mesh[i] - r2
    r4 = r2 - h * f_mesh[i + 1] - r3
    out = x_mesh[i] + th * (r2 + th1 * (r3 + th * (r4 + th1 * d_mesh[i])))
    # mesh points are returned exactly
    exact = tq == tm[i + 1]
    out[exact] = x_mesh[i + 1][exact]
    return out


def integrate_trajectory(
    s: Scenario,
    x0: complex,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    t_eval=None,
) -> Trajectory:
    """Integrate dx/dt = complex_velocity from x0 over t_span.

    With ``t_eval`` the trajectory is sampled at those times (t0 is prepended
    if absent); otherwise the accepted-step mesh is returned.  Backward
    integration (t1 < t0) is allowed.  Hitting a node yields a partial
    trajectory with status ``aborted-at-node`` rather than an exception.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 == t0:
        raise ValueError("empty time span")
    direction = 1.0 if t1 > t0 else -1.0
    x0 = complex(x0)
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=np.float64).ravel()
        if t_eval.size == 0 or t_eval[0] != t0:
            t_eval = np.concatenate([[t0], t_eval])
        if np.any(direction * np.diff(t_eval) <= 0):
            raise ValueError("t_eval must be strictly monotone in the direction of integration")
        if direction * (t_eval[-1] - t1) > 0:
            raise ValueError("t_eval extends beyond t_span")
        if len(t_eval) > cfg.max_samples:
            raise ValueError(f"{len(t_eval)} samples requested, max_samples={cfg.max_samples}")

    log_derivative(s, x0, t0)  # node check on the initial condition
    kind, p = s.kernel_args()
    ts, xs, fs, ds, n_acc, n_rej, code = _kernels.integrate_complex(
        kind, p, x0, t0, t1, cfg.rel_tol, cfg.abs_tol, cfg.initial_step, cfg.min_step, cfg.max_steps
    )
    status = _STATUS[int(code)]
    if t_eval is None:
        t_out, x_out = np.array(ts), np.array(xs)
    else:
        reached = ts[-1]
        t_out = t_eval[direction * (t_eval - reached) <= 0] if status is not TrajectoryStatus.COMPLETED else t_eval
        x_out = dense_output(ts, xs, fs, ds, t_out)
        x_out[0] = x0
    return Trajectory(s, t_out, x_out, status, int(n_acc), int(n_rej))


def _batch_dopri_numpy(field, x0, t0, t1, cfg):
    """Vectorized DOPRI5 over independent real particles, endpoint only.

    Each particle keeps its own time and step; rows that are finished are
    masked out.  Returns (positions, status codes).
    """
    K = _kernels
    x = np.array(x0, dtype=np.float64)
    n = x.size
    t = np.full(n, float(t0))
    direction = 1.0 if t1 >= t0 else -1.0
    h = np.full(n, direction * min(cfg.initial_step, abs(t1 - t0)))
    err_prev = np.full(n, 1e-4)
    rejected = np.zeros(n, dtype=bool)
    status = np.full(n, K.STATUS_COMPLETED)
    steps = np.zeros(n, dtype=np.int64)
    f = field(x, t)
    active = np.isfinite(f)
    status[~active] = K.STATUS_NODE
    tol_t = 1e-13 * max(1.0, abs(t1 - t0))
    active &= np.abs(t1 - t) > tol_t
    while np.any(active):
        idx = np.flatnonzero(active)
        xi, ti, hi, fi = x[idx], t[idx], h[idx], f[idx]
        hi = np.where(np.abs(hi) > np.abs(t1 - ti), t1 - ti, hi)
        under = np.abs(hi) < cfg.min_step
        k2 = field(xi + hi * K.A21 * fi, ti + K.C2 * hi)
        k3 = field(xi + hi * (K.A31 * fi + K.A32 * k2), ti + K.C3 * hi)
        k4 = field(xi + hi * (K.A41 * fi + K.A42 * k2 + K.A43 * k3), ti + K.C4 * hi)
        k5 = field(xi + hi * (K.A51 * fi + K.A52 * k2 + K.A53 * k3 + K.A54 * k4), ti + K.C5 * hi)
        k6 = field(xi + hi * (K.A61 * fi + K.A62 * k2 + K.A63 * k3 + K.A64 * k4 + K.A65 * k5), ti + hi)
        xn = xi + hi * (K.B1 * fi + K.B3 * k3 + K.B4 * k4 + K.B5 * k5 + K.B6 * k6)
        k7 = field(xn, ti + hi)
        e = hi * (K.E1 * fi + K.E3 * k3 + K.E4 * k4 + K.E5 * k5 + K.E6 * k6 + K.E7 * k7)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            err = np.abs(e) / (cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(xi), np.abs(xn)))
            bad = ~(np.isfinite(err) & np.isfinite(k7))
            ok = (err <= 1.0) & ~bad
            fac_ok = np.where(
                err == 0.0, K.FAC_MAX, K.SAFETY * err ** (-K.BETA1) * err_prev[idx] ** K.BETA2
            )
            fac_ok = np.clip(fac_ok, K.FAC_MIN, K.FAC_MAX)
            fac_ok = np.where(rejected[idx], np.minimum(fac_ok, 1.0), fac_ok)
            fac_bad = np.maximum(K.FAC_MIN, K.SAFETY * err ** (-1 / 5))
        fac = np.where(ok, fac_ok, np.where(bad, 0.25, fac_bad))
        ok &= ~under
        acc = idx[ok]
        x[acc] = xn[ok]
        t[acc] = ti[ok] + hi[ok]
        f[acc] = k7[ok]
        err_prev[acc] = np.maximum(err[ok], 1e-4)
        rejected[idx] = ~ok
        h[idx] = hi * fac
        steps[idx] += 1
        status[idx[under]] = K.STATUS_NODE
        status[idx[steps[idx] >= cfg.max_steps]] = K.STATUS_UNDERFLOW
        active[idx[under]] = False
        active &= (np.abs(t1 - t) > tol_t) & (status == K.STATUS_COMPLETED)
    return x, status


def integrate_real_flow(s: Scenario, x0, t0: float, t1: float, cfg: IntegratorConfig | None = None):
    """Advance real positions under ``real_axis_velocity`` from t0 to t1.

    Returns (positions, string array of ``TrajectoryStatus`` values).  Uses
    the compiled per-particle kernel when numba is active and the vectorized
    numpy integrator otherwise.
    """
    cfg = cfg or IntegratorConfig()
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    if t1 == t0:
        return x0.copy(), np.full(x0.size, TrajectoryStatus.COMPLETED.value, dtype="U16")
    kind, p = s.kernel_args()
    if HAS_NUMBA:
        x, codes = _kernels.integrate_real_batch(
            kind, p, x0, float(t0), float(t1), cfg.rel_tol, cfg.abs_tol, cfg.initial_step, cfg.min_step, cfg.max_steps
        )
    else:

        def field(x, t):
            ps = s.psi(x, t)
            dps = s.dpsi(x, t)
            with np.errstate(invalid="ignore", divide="ignore"):
                v = (s.hbar / s.mass) * (np.conj(ps) * dps).imag / (ps.real**2 + ps.imag**2)
            return v

        x, codes = _batch_dopri_numpy(field, x0, float(t0), float(t1), cfg)
    names = np.array([_STATUS[c].value for c in sorted(_STATUS)])
    return x, names[np.asarray(codes, dtype=np.int64)]
