"""Single-pulse radar detection probability and its sensitivity to aircraft pose uncertainty."""
from .detection import (
    BOLTZMANN,
    DetectionPoint,
    erfc,
    evaluate_point,
    pd_batch,
    probability_of_detection,
    snr,
)
from .geometry import (
    AircraftState,
    AspectAngles,
    BodyVector,
    RadarSite,
    aspect_angles,
    dcm_ned_to_body,
    radar_in_body,
    range_to_radar,
)
from .jacobians import (
    PdJacobian,
    PdVariance,
    PoseCovariance,
    assemble_a_p,
    propagate_variance,
)
from .montecarlo import UncertaintyLevel, coverage_check, histogram_vs_gaussian, run_ensemble
from .rcs import Constant, Ellipsoid, RcsModel, SimpleSpikeball, rcs_value
from .scenario import (
    ScenarioConfig,
    SweepSpec,
    gradcheck,
    linear_sweep,
    load_config,
    nominal_state_at,
    validate_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BOLTZMANN",
    "DetectionPoint",
    "erfc",
    "evaluate_point",
    "pd_batch",
    "probability_of_detection",
    "snr",
    "AircraftState",
    "AspectAngles",
    "BodyVector",
    "RadarSite",
    "aspect_angles",
    "dcm_ned_to_body",
    "radar_in_body",
    "range_to_radar",
    "PdJacobian",
    "PdVariance",
    "PoseCovariance",
    "assemble_a_p",
    "propagate_variance",
    "ScenarioConfig",
    "SweepSpec",
    "gradcheck",
    "linear_sweep",
    "load_config",
    "nominal_state_at",
    "validate_sweep",
    "UncertaintyLevel",
    "coverage_check",
    "histogram_vs_gaussian",
    "run_ensemble",
    "Constant",
    "Ellipsoid",
    "RcsModel",
    "SimpleSpikeball",
    "rcs_value",
]
