"""Closed-form wavefunctions for the five worked scenarios.

Every scenario evaluates Psi, its analytic x-derivative, the logarithmic
derivative (1/Psi) dPsi/dx, its x-derivative, and the logarithmic time
derivative at complex position and real time.  Positions are plain Python
``complex`` values or ``complex128`` arrays; a ``ComplexPosition`` is simply
``x.real + 1j * x.imag``.

Normalization constants follow unit L2 norm along the real axis, so that
``born_density`` is directly a probability density for the normalizable
scenarios (harmonic oscillator, Gaussian packet).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysicalConstants",
    "Scenario",
    "HarmonicOscillator",
    "PlaneWave",
    "PotentialStep",
    "GaussianPacket",
    "ParameterError",
    "NodeProximityError",
    "UnsupportedScenarioError",
    "NODE_TOL",
    "evaluate_psi",
    "psi_derivative",
    "log_derivative",
    "born_density",
    "nodes",
]

#: relative size of Psi, against the magnitude of the terms that cancel at a
#: node, below which a point counts as sitting on the node
NODE_TOL = 1e-10

KIND_HO, KIND_PLANE, KIND_STEP, KIND_PACKET = 0, 1, 2, 3


class ParameterError(ValueError):
    """Scenario or configuration parameter outside its domain."""


class UnsupportedScenarioError(ValueError):
    """Operation not defined for this scenario (e.g. non-normalizable)."""


class NodeProximityError(ArithmeticError):
    """Evaluation point lies on (or numerically at) a zero of Psi."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ParameterError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ParameterError(f"mass must be positive, got {self.mass}")


def _as_complex(x):
    return np.asarray(x, dtype=np.complex128)


def _ret(a):
    # 0-d arrays go back to Python scalars
    return a.item() if np.ndim(a) == 0 else a


@dataclass(frozen=True)
class Scenario:
    """Base class. Subclasses supply the closed forms."""

    constants: PhysicalConstants = field(default_factory=PhysicalConstants, kw_only=True)

    normalizable = False
    kind = -1
    label = "scenario"

    @property
    def hbar(self):
        return self.constants.hbar

    @property
    def mass(self):
        return self.constants.mass

    # -- closed forms (array in, array out) ---------------------------------
    def psi(self, x, t):
        raise NotImplementedError

    def dpsi(self, x, t):
        raise NotImplementedError

    def log_derivative(self, x, t):
        raise NotImplementedError

    def log_derivative_dx(self, x, t):
        raise NotImplementedError

    def log_derivative_dt(self, x, t):
        """d(log Psi)/dt."""
        raise NotImplementedError

    def potential(self, x):
        return np.zeros_like(_as_complex(x))

    def node_measure(self, x, t):
        """|Psi| relative to the terms that cancel at a node (inf: no nodes)."""
        return np.full(np.shape(x), np.inf)

    def nodes(self, t=0.0):
        return []

    @property
    def energy_scale(self):
        raise NotImplementedError

    def kernel_args(self):
        """(kind code, float64 parameter vector) for the compiled kernels."""
        raise NotImplementedError


@dataclass(frozen=True)
class HarmonicOscillator(Scenario):
    alpha: float = 1.0
    n: int = 0

    normalizable = True
    kind = KIND_HO
    label = "harmonic"

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.n not in (0, 1, 2):
            raise ParameterError(f"quantum number must be 0, 1 or 2, got {self.n}")

    @property
    def omega(self):
        return self.hbar * self.alpha**2 / self.mass

    @property
    def energy(self):
        return self.hbar * self.omega * (self.n + 0.5)

    energy_scale = energy

    @property
    def norm(self):
        return math.sqrt(self.alpha / (2**self.n * math.factorial(self.n) * math.sqrt(math.pi)))

    def _hermite(self, X):
        if self.n == 0:
            return np.ones_like(X), np.zeros_like(X), np.zeros_like(X)
        if self.n == 1:
            return 2 * X, np.full_like(X, 2.0), np.zeros_like(X)
        return 4 * X**2 - 2, 8 * X, np.full_like(X, 8.0)

    def psi(self, x, t):
        x = _as_complex(x)
        X = self.alpha * x
        h, _, _ = self._hermite(X)
        return self.norm * h * np.exp(-X**2 / 2 - 1j * self.energy * t / self.hbar)

    def dpsi(self, x, t):
        x = _as_complex(x)
        X = self.alpha * x
        h, hp, _ = self._hermite(X)
        env = np.exp(-X**2 / 2 - 1j * self.energy * t / self.hbar)
        return self.norm * self.alpha * (hp - X * h) * env

    def log_derivative(self, x, t):
        X = self.alpha * _as_complex(x)
        h, hp, _ = self._hermite(X)
        return self.alpha * (hp / h - X)

    def log_derivative_dx(self, x, t):
        X = self.alpha * _as_complex(x)
        h, hp, hpp = self._hermite(X)
        return self.alpha**2 * (hpp / h - (hp / h) ** 2 - 1)

    def log_derivative_dt(self, x, t):
        return np.full(np.shape(x), -1j * self.energy / self.hbar)

    def potential(self, x):
        x = _as_complex(x)
        return 0.5 * self.mass * self.omega**2 * x**2

    def node_measure(self, x, t):
        X = self.alpha * _as_complex(x)
        if self.n == 0:
            return np.full(X.shape, np.inf)
        h, _, _ = self._hermite(X)
        scale = 2.0**self.n * np.maximum(1.0, np.abs(X)) ** self.n
        return np.abs(h) / scale

    def nodes(self, t=0.0):
        if self.n == 1:
            return [0j]
        if self.n == 2:
            r = 1 / (self.alpha * math.sqrt(2))
            return [complex(r), complex(-r)]
        return []

    def kernel_args(self):
        return KIND_HO, np.array([self.hbar, self.mass, self.alpha, float(self.n), self.energy])


@dataclass(frozen=True)
class PlaneWave(Scenario):
    k: float = 1.0
    amplitude: complex = 1.0

    kind = KIND_PLANE
    label = "plane"

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise ParameterError(f"k must be real and finite, got {self.k}")
        if self.amplitude == 0:
            raise ParameterError("plane-wave amplitude must be nonzero")

    @property
    def energy(self):
        return (self.hbar * self.k) ** 2 / (2 * self.mass)

    @property
    def energy_scale(self):
        return max(self.energy, self.hbar**2 / (2 * self.mass))

    def psi(self, x, t):
        x = _as_complex(x)
        return self.amplitude * np.exp(1j * self.k * x - 1j * self.energy * t / self.hbar)

    def dpsi(self, x, t):
        return 1j * self.k * self.psi(x, t)

    def log_derivative(self, x, t):
        return np.full(np.shape(x), 1j * self.k)

    def log_derivative_dx(self, x, t):
        return np.zeros(np.shape(x), dtype=np.complex128)

    def log_derivative_dt(self, x, t):
        return np.full(np.shape(x), -1j * self.energy / self.hbar)

    def kernel_args(self):
        a = complex(self.amplitude)
        return KIND_PLANE, np.array([self.hbar, self.mass, self.k, a.real, a.imag])


@dataclass(frozen=True)
class PotentialStep(Scenario):
    """Step of height V0 at x = 0, incident energy E > V0.

    ``reflection`` overrides the matched amplitude R = (k - q)/(k + q); the
    transmitted amplitude is then 1 + R so that Psi stays continuous.
    """

    E: float = 1.0
    V0: float = 0.5
    reflection: float | None = None

    kind = KIND_STEP
    label = "step"

    def __post_init__(self):
        if not (self.E > self.V0 > 0):
            raise ParameterError(f"potential step needs E > V0 > 0, got E={self.E}, V0={self.V0}")
        if self.reflection is not None and not (0 <= self.reflection < 1):
            raise ParameterError(f"reflection amplitude must lie in [0, 1), got {self.reflection}")

    @property
    def k(self):
        return math.sqrt(2 * self.mass * self.E) / self.hbar

    @property
    def q(self):
        return math.sqrt(2 * self.mass * (self.E - self.V0)) / self.hbar

    @property
    def R(self):
        if self.reflection is not None:
            return float(self.reflection)
        return (self.k - self.q) / (self.k + self.q)

    @property
    def T(self):
        return 1.0 + self.R

    energy_scale = property(lambda self: self.E)

    def _phase(self, t):
        return np.exp(-1j * self.E * t / self.hbar)

    def _split(self, x):
        x = _as_complex(x)
        return x, x.real < 0

    def psi(self, x, t):
        x, left = self._split(x)
        out = np.empty_like(x)
        xl, xr = x[left], x[~left]
        out[left] = np.exp(1j * self.k * xl) + self.R * np.exp(-1j * self.k * xl)
        out[~left] = self.T * np.exp(1j * self.q * xr)
        return out * self._phase(t)

    def dpsi(self, x, t):
        x, left = self._split(x)
        out = np.empty_like(x)
        xl, xr = x[left], x[~left]
        out[left] = 1j * self.k * (np.exp(1j * self.k * xl) - self.R * np.exp(-1j * self.k * xl))
        out[~left] = 1j * self.q * self.T * np.exp(1j * self.q * xr)
        return out * self._phase(t)

    def log_derivative(self, x, t):
        x, left = self._split(x)
        out = np.full(x.shape, 1j * self.q)
        u2 = np.exp(2j * self.k * x[left])
        out[left] = 1j * self.k * (u2 - self.R) / (u2 + self.R)
        return out

    def log_derivative_dx(self, x, t):
        x, left = self._split(x)
        out = np.zeros(x.shape, dtype=np.complex128)
        L = self.log_derivative(x[left], t)
        out[left] = -self.k**2 - L**2
        return out

    def log_derivative_dt(self, x, t):
        return np.full(np.shape(x), -1j * self.E / self.hbar)

    def potential(self, x):
        x = _as_complex(x)
        return np.where(x.real < 0, 0.0, self.V0).astype(np.complex128)

    def node_measure(self, x, t):
        x, left = self._split(x)
        out = np.full(x.shape, np.inf)
        xl = x[left]
        a = np.exp(1j * self.k * xl)
        b = self.R * np.exp(-1j * self.k * xl)
        out[left] = np.abs(a + b) / (np.abs(a) + np.abs(b))
        return out

    def nearest_node(self, x):
        """Closest zero of the region-I form e^{ikx} + R e^{-ikx}, or None."""
        if complex(x).real >= 0 or self.R == 0:
            return None
        k = self.k
        im = -math.log(self.R) / (2 * k)
        j = round((2 * k * complex(x).real / math.pi - 1) / 2)
        return complex((2 * j + 1) * math.pi / (2 * k), im)

    def kernel_args(self):
        return KIND_STEP, np.array([self.hbar, self.mass, self.k, self.q, self.R, self.T, self.E, self.V0])


@dataclass(frozen=True)
class GaussianPacket(Scenario):
    """Free Gaussian packet of width sigma and mean wavenumber kbar."""

    sigma: float = 1.0
    kbar: float = 1.0

    normalizable = True
    kind = KIND_PACKET
    label = "packet"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.kbar):
            raise ParameterError(f"kbar must be real and finite, got {self.kbar}")

    @property
    def energy_scale(self):
        return self.hbar**2 * (self.kbar**2 + 1 / self.sigma**2) / (2 * self.mass)

    def _s(self, t):
        return self.sigma**2 + 1j * self.hbar * t / self.mass

    def _y(self, x):
        return _as_complex(x) - 1j * self.sigma**2 * self.kbar

    def psi(self, x, t):
        s, y = self._s(t), self._y(x)
        c = math.sqrt(self.sigma / math.sqrt(math.pi))
        return c / np.sqrt(s) * np.exp(-(y**2) / (2 * s) - (self.sigma * self.kbar) ** 2 / 2)

    def dpsi(self, x, t):
        return self.log_derivative(x, t) * self.psi(x, t)

    def log_derivative(self, x, t):
        return -self._y(x) / self._s(t)

    def log_derivative_dx(self, x, t):
        return np.full(np.shape(x), -1 / self._s(t))

    def log_derivative_dt(self, x, t):
        s, y = self._s(t), self._y(x)
        return (1j * self.hbar / self.mass) * (y**2 / (2 * s**2) - 1 / (2 * s))

    def center(self, t):
        return self.hbar * self.kbar * t / self.mass

    def width(self, t):
        """Standard deviation of the Born density at time t."""
        tau = self.hbar * t / self.mass
        return math.sqrt((self.sigma**4 + tau**2) / (2 * self.sigma**2))

    def kernel_args(self):
        return KIND_PACKET, np.array([self.hbar, self.mass, self.sigma, self.kbar])


def _check_node(s, x, t):
    m = s.node_measure(x, t)
    bad = m < NODE_TOL
    if np.any(bad):
        xb = complex(np.asarray(x, dtype=np.complex128)[bad].flat[0])
        near = s.nearest_node(xb) if isinstance(s, PotentialStep) else None
        if near is None:
            cand = s.nodes(t)
            near = min(cand, key=lambda z: abs(z - xb)) if cand else None
        raise NodeProximityError(f"|Psi| vanishes at x={xb} (nearest node {near})", node=near)


def evaluate_psi(s: Scenario, x, t: float = 0.0):
    """Psi(x, t), analytically continued to complex x."""
    return _ret(s.psi(x, t))


def psi_derivative(s: Scenario, x, t: float = 0.0):
    """Analytic dPsi/dx."""
    return _ret(s.dpsi(x, t))


def log_derivative(s: Scenario, x, t: float = 0.0):
    """(1/Psi) dPsi/dx from the analytic derivative.

    Raises NodeProximityError within NODE_TOL of a zero of Psi.
    """
    _check_node(s, x, t)
    return _ret(s.log_derivative(x, t))


def born_density(s: Scenario, x_r, t: float = 0.0):
    """Psi* Psi on the real axis.

    Unnormalized |Psi|^2 for the plane wave and the step.
    """
    x_r = np.asarray(x_r, dtype=np.float64)
    p = s.psi(x_r, t)
    return _ret((p.real**2 + p.imag**2).astype(np.float64))


def nodes(s: Scenario, t: float = 0.0) -> list[complex]:
    """Zeros of Psi.

    The step's region-I form has an infinite complex lattice of zeros off the
    real axis; none lies on the physical domain, so the list is empty there
    (``PotentialStep.nearest_node`` locates them on demand).
    """
    return list(s.nodes(t))
