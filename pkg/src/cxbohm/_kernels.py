"""Scalar kernels for the velocity fields and the adaptive integrator.

Scenario dispatch is by integer kind code plus a float64 parameter vector
(see ``Scenario.kernel_args``) so that the same source compiles under numba
and runs unchanged as plain Python.

Parameter layouts::

    HO      [hbar, m, alpha, n, E_n]
    PLANE   [hbar, m, k, A.re, A.im]
    STEP    [hbar, m, k, q, R, T, E, V0]
    PACKET  [hbar, m, sigma, kbar]
"""
import math
import cmath

import numpy as np

from ._accel import njit, prange

KIND_HO, KIND_PLANE, KIND_STEP, KIND_PACKET = 0, 1, 2, 3

STATUS_COMPLETED, STATUS_NODE, STATUS_UNDERFLOW = 0, 1, 2

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# continuous extension (Hairer & Wanner dense output for DOPRI5)
D1, D3, D4 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072
D5, D6, D7 = 701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423
# b - b_hat
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 5.0
BETA1, BETA2 = 0.7 / 5, 0.4 / 5
NODE_CLAMP = 0.5
NODE_NEAR = 100.0


@njit
def log_derivative(kind, p, x, t):
    if kind == KIND_HO:
        alpha, n = p[2], int(p[3])
        X = alpha * x
        if n == 0:
            return -alpha * X
        if n == 1:
            return alpha * (1 / X - X)
        return alpha * (8 * X / (4 * X * X - 2) - X)
    if kind == KIND_PLANE:
        return 1j * p[2]
    if kind == KIND_STEP:
        k, q, R = p[2], p[3], p[4]
        if x.real >= 0:
            return 1j * q + 0j
        u2 = cmath.exp(2j * k * x)
        return 1j * k * (u2 - R) / (u2 + R)
    # packet
    hbar, m, sigma, kbar = p[0], p[1], p[2], p[3]
    s = sigma * sigma + 1j * hbar * t / m
    return -(x - 1j * sigma * sigma * kbar) / s


@njit
def velocity(kind, p, x, t):
    """(hbar / (i m)) (1/Psi) dPsi/dx."""
    return -1j * (p[0] / p[1]) * log_derivative(kind, p, x, t)


@njit
def node_distance(kind, p, x, t):
    if kind == KIND_HO:
        n = int(p[3])
        if n == 1:
            return abs(x)
        if n == 2:
            r = 1 / (p[2] * math.sqrt(2.0))
            return min(abs(x - r), abs(x + r))
        return math.inf
    if kind == KIND_STEP:
        k, R = p[2], p[4]
        if x.real >= 0 or R <= 0:
            return math.inf
        im = -math.log(R) / (2 * k)
        j = math.floor((2 * k * x.real / math.pi - 1) / 2 + 0.5)
        node = complex((2 * j + 1) * math.pi / (2 * k), im)
        return abs(x - node)
    return math.inf


@njit
def psi_and_dpsi(kind, p, x, t):
    """Psi and dPsi/dx up to a common real positive factor.

    For the oscillator the Gaussian envelope and normalization are dropped;
    both are real and positive on the real axis and cancel in every ratio
    this is used for.
    """
    hbar, m = p[0], p[1]
    if kind == KIND_HO:
        alpha, n, E = p[2], int(p[3]), p[4]
        X = alpha * x
        ph = cmath.exp(-1j * E * t / hbar)
        if n == 0:
            h, hp = 1.0 + 0j, 0j
        elif n == 1:
            h, hp = 2 * X, 2.0 + 0j
        else:
            h, hp = 4 * X * X - 2, 8 * X
        return h * ph, alpha * (hp - X * h) * ph
    if kind == KIND_PLANE:
        k = p[2]
        E = hbar * k * k / (2 * m)
        ps = complex(p[3], p[4]) * cmath.exp(1j * k * x - 1j * E * t / hbar)
        return ps, 1j * k * ps
    if kind == KIND_STEP:
        k, q, R, T, E = p[2], p[3], p[4], p[5], p[6]
        ph = cmath.exp(-1j * E * t / hbar)
        if x.real < 0:
            a = cmath.exp(1j * k * x)
            b = R * cmath.exp(-1j * k * x)
            return (a + b) * ph, 1j * k * (a - b) * ph
        ps = T * cmath.exp(1j * q * x) * ph
        return ps, 1j * q * ps
    sigma, kbar = p[2], p[3]
    s = sigma * sigma + 1j * hbar * t / m
    y = x - 1j * sigma * sigma * kbar
    ps = cmath.exp(-y * y / (2 * s) - 0.5 * (sigma * kbar) ** 2) / cmath.sqrt(s)
    return ps, -y / s * ps


@njit
def real_axis_velocity(kind, p, xr, t):
    """(hbar / 2im) [Psi* Psi' - Psi'* Psi] / (Psi* Psi) at real xr."""
    ps, dps = psi_and_dpsi(kind, p, complex(xr, 0.0), t)
    num = ps.conjugate() * dps - dps.conjugate() * ps
    den = ps.real * ps.real + ps.imag * ps.imag
    return ((p[0] / (2j * p[1])) * num / den).real


@njit
def _grow(a, n):
    b = np.empty(2 * a.shape[0], dtype=a.dtype)
    b[:n] = a[:n]
    return b


@njit
def _err_norm_c(e, y, ynew, rtol, atol):
    sc = atol + rtol * max(abs(y), abs(ynew))
    return math.sqrt(0.5 * (e.real * e.real + e.imag * e.imag)) / sc


@njit
def integrate_complex(kind, p, x0, t0, t1, rtol, atol, h0, hmin, max_steps):
    """Adaptive DOPRI5 with PI control for dx/dt = velocity(x, t), x complex.

    Returns the accepted-step mesh (t, x, dx/dt), the per-interval
    coefficient of the quartic continuous extension, the accepted/rejected
    counts and a status code.  Steps are clamped so that one step moves less
    than half the distance to the nearest node; the run aborts when the
    step falls below ``hmin``.
    """
    cap = 256
    ts = np.empty(cap)
    xs = np.empty(cap, dtype=np.complex128)
    fs = np.empty(cap, dtype=np.complex128)
    ds = np.empty(cap, dtype=np.complex128)
    direction = 1.0 if t1 >= t0 else -1.0
    t, x = t0, complex(x0)
    f = velocity(kind, p, x, t)
    ts[0], xs[0], fs[0] = t, x, f
    n = 1
    n_acc, n_rej = 0, 0
    status = STATUS_COMPLETED
    if not (abs(f) < math.inf):
        return ts[:1], xs[:1], fs[:1], ds[:0], 0, 0, STATUS_NODE
    h = direction * min(abs(h0), abs(t1 - t0))
    err_prev = 1e-4
    rejected = False
    span = abs(t1 - t0)
    while abs(t1 - t) > 1e-13 * max(1.0, span):
        if n_acc + n_rej >= max_steps:
            status = STATUS_UNDERFLOW
            break
        if abs(h) > abs(t1 - t):
            h = t1 - t
        clamped = False
        d = node_distance(kind, p, x, t)
        v = abs(f)
        if v * abs(h) > NODE_CLAMP * d:
            h = direction * NODE_CLAMP * d / v
            clamped = True
        if abs(h) < hmin:
            # error control near a pole also starves the step; blame the node
            # when it lies within a few hundred minimal displacements
            near = d < NODE_NEAR * v * hmin
            status = STATUS_NODE if clamped or near else STATUS_UNDERFLOW
            break
        k1 = f
        k2 = velocity(kind, p, x + h * A21 * k1, t + C2 * h)
        k3 = velocity(kind, p, x + h * (A31 * k1 + A32 * k2), t + C3 * h)
        k4 = velocity(kind, p, x + h * (A41 * k1 + A42 * k2 + A43 * k3), t + C4 * h)
        k5 = velocity(kind, p, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), t + C5 * h)
        k6 = velocity(kind, p, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), t + h)
        xn = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = velocity(kind, p, xn, t + h)
        e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = _err_norm_c(e, x, xn, rtol, atol)
        if not (err < math.inf) or not (abs(k7) < math.inf):
            n_rej += 1
            h *= 0.25
            rejected = True
            continue
        if err <= 1.0:
            n_acc += 1
            t = t + h
            x = xn
            f = k7
            if n >= ts.shape[0]:
                ts = _grow(ts, n)
                xs = _grow(xs, n)
                fs = _grow(fs, n)
                ds = _grow(ds, n - 1)
            ts[n], xs[n], fs[n] = t, x, f
            ds[n - 1] = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
            n += 1
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * err ** (-BETA1) * err_prev**BETA2
            fac = min(FAC_MAX, max(FAC_MIN, fac))
            if rejected:
                fac = min(1.0, fac)
            h *= fac
            err_prev = max(err, 1e-4)
            rejected = False
        else:
            n_rej += 1
            h *= max(FAC_MIN, SAFETY * err ** (-1 / 5))
            rejected = True
    return ts[:n], xs[:n], fs[:n], ds[: n - 1], n_acc, n_rej, status


@njit
def integrate_real_endpoint(kind, p, x0, t0, t1, rtol, atol, h0, hmin, max_steps):
    """DOPRI5 for the real-axis flow dx/dt = real_axis_velocity, endpoint only."""
    direction = 1.0 if t1 >= t0 else -1.0
    t, x = t0, x0
    f = real_axis_velocity(kind, p, x, t)
    if not (abs(f) < math.inf):
        return x, STATUS_NODE
    h = direction * min(abs(h0), abs(t1 - t0))
    err_prev = 1e-4
    rejected = False
    steps = 0
    span = abs(t1 - t0)
    while abs(t1 - t) > 1e-13 * max(1.0, span):
        if steps >= max_steps:
            return x, STATUS_UNDERFLOW
        steps += 1
        if abs(h) > abs(t1 - t):
            h = t1 - t
        if abs(h) < hmin:
            return x, STATUS_NODE
        k1 = f
        k2 = real_axis_velocity(kind, p, x + h * A21 * k1, t + C2 * h)
        k3 = real_axis_velocity(kind, p, x + h * (A31 * k1 + A32 * k2), t + C3 * h)
        k4 = real_axis_velocity(kind, p, x + h * (A41 * k1 + A42 * k2 + A43 * k3), t + C4 * h)
        k5 = real_axis_velocity(kind, p, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), t + C5 * h)
        k6 = real_axis_velocity(
            kind, p, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), t + h
        )
        xn = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = real_axis_velocity(kind, p, xn, t + h)
        e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = abs(e) / (atol + rtol * max(abs(x), abs(xn)))
        if not (err < math.inf) or not (abs(k7) < math.inf):
            h *= 0.25
            rejected = True
            continue
        if err <= 1.0:
            t = t + h
            x = xn
            f = k7
            fac = FAC_MAX if err == 0.0 else SAFETY * err ** (-BETA1) * err_prev**BETA2
            fac = min(FAC_MAX, max(FAC_MIN, fac))
            if rejected:
                fac = min(1.0, fac)
            h *= fac
            err_prev = max(err, 1e-4)
            rejected = False
        else:
            h *= max(FAC_MIN, SAFETY * err ** (-1 / 5))
            rejected = True
    return x, STATUS_COMPLETED


@njit(parallel=True)
def integrate_real_batch(kind, p, x0s, t0, t1, rtol, atol, h0, hmin, max_steps):
    n = x0s.shape[0]
    out = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    for i in prange(n):
        out[i], status[i] = integrate_real_endpoint(kind, p, x0s[i], t0, t1, rtol, atol, h0, hmin, max_steps)
    return out, status
