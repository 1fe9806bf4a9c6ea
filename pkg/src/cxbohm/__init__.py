"""Complex-plane de Broglie-Bohm trajectories with closed-form oracles."""
__version__ = "0.1.0"

from ._accel import BACKEND, HAS_NUMBA
from .wavefunctions import (
    GaussianPacket,
    HarmonicOscillator,
    NodeProximityError,
    ParameterError,
    PhysicalConstants,
    PlaneWave,
    PotentialStep,
    Scenario,
    UnsupportedScenarioError,
    born_density,
    evaluate_psi,
    log_derivative,
    nodes,
)
from .trajectory import (
    IntegratorConfig,
    Trajectory,
    TrajectoryStatus,
    complex_velocity,
    integrate_trajectory,
    real_axis_velocity,
)
from .oracles import (
    ConservedQuantity,
    NoClosedFormError,
    analytic_trajectory,
    constant_of_motion,
    quantum_hj_residual,
    step_contour_value,
)
from .ensemble import (
    EnsembleSnapshot,
    ResidualGrid,
    continuity_residual,
    evolve_real_ensemble,
    expectation_value,
    sample_born,
)
