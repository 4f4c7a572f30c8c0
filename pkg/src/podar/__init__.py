"""Potential-damage driving risk (PODAR) and per-driver parameter calibration."""

from .calibration import (
    BoundaryGradientWarning,
    CalibrationConfig,
    CalibrationResult,
    HorizonSearch,
    SignalComparison,
    SignalKind,
    StandardizedDataset,
    analytic_gradient,
    calibrate,
    compare_signals,
    loss,
    r_squared,
    select_horizon,
    standardize_objective,
    standardize_subjective,
)
from .exceptions import (
    DegenerateGeometryError,
    InvalidInputError,
    NormalizationError,
    OptimizationError,
    PodarError,
    SignalParseError,
)
from .experiment import (
    GridConfig,
    ScenarioSet,
    SyntheticDataset,
    SyntheticSpec,
    build_grid_scenarios,
    generate_synthetic,
    load_signals,
    read_grid_config,
    write_grid_config,
    write_signals,
)
from .geometry import BodyGeometry, KinematicState
from .risk import (
    PodarParams,
    RiskBreakdown,
    RoadObject,
    Scene,
    Trajectory,
    closing_speed,
    contour_distance,
    evaluate_scene,
    podar_scene,
    potential_damage,
    predict_constant_velocity,
    spatial_attenuation,
    temporal_attenuation,
)

__version__ = "0.1.0"
