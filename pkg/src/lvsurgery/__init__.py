"""Three-species Lotka-Volterra dynamics and the sphere-to-torus opening of
its chaotic attractor around the slow manifold."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DomainError,
    Params,
    SlowManifold,
    Spectrum,
    State,
    SteadyStateSet,
    jacobian,
    jacobian_fd,
    slow_manifold,
    spectrum_closed_form,
    spectrum_numeric,
    steady_states,
    vector_field,
)
from .integrator import (  # noqa: E402
    IntegratorConfig,
    Trajectory,
    discard_transient,
    integrate,
    integrate_fixed,
    step,
)
from .analysis import (  # noqa: E402
    LyapunovConfig,
    PointCharacter,
    RegionReport,
    chaotic_candidate,
    classify_point,
    lyapunov_max,
)
from .topology import (  # noqa: E402
    BandConfig,
    HoleMetrics,
    ShapeClass,
    SimConfig,
    SurgeryScanResult,
    Thresholds,
    classify_shape,
    hole_metrics,
    surgery_scan,
)

__all__ = [
    "DomainError",
    "Params",
    "SlowManifold",
    "Spectrum",
    "State",
    "SteadyStateSet",
    "jacobian",
    "jacobian_fd",
    "slow_manifold",
    "spectrum_closed_form",
    "spectrum_numeric",
    "steady_states",
    "vector_field",
    "IntegratorConfig",
    "Trajectory",
    "discard_transient",
    "integrate",
    "integrate_fixed",
    "step",
    "LyapunovConfig",
    "PointCharacter",
    "RegionReport",
    "chaotic_candidate",
    "classify_point",
    "lyapunov_max",
    "BandConfig",
    "HoleMetrics",
    "ShapeClass",
    "SimConfig",
    "SurgeryScanResult",
    "Thresholds",
    "classify_shape",
    "hole_metrics",
    "surgery_scan",
]
