"""Simulate field mill surveys under a charged square plate and recover its surface charge density."""

from .config import ConfigError, RunConfig, load_config
from .fields import (
    EPSILON0,
    CenterlineGeometry,
    ChargedPlate,
    PointCharge,
    QuadratureSpec,
    World,
    centerline_potential,
    centerline_shape,
    integral_field_axial,
    integral_potential,
    refinement_table,
    solid_angle_field_axial,
)
from .inference import (
    ComparisonReport,
    FitResult,
    PositionSummary,
    compare_platforms,
    fit_sigma,
    summarize,
)
from .instrument import (
    Condition,
    MountLabel,
    MountPosition,
    PlatformKind,
    PlatformModel,
    SensorConfig,
    sensor_read,
    true_potential_at_sensor,
)
from .lsq import ConvergenceError, DegenerateDesignError, iterative_damped_least_squares
from .survey import (
    FactorialPlan,
    MeasurementRecord,
    TransectPlan,
    handheld_reference,
    read_records_csv,
    run_factorial,
    run_transect,
    write_records_csv,
)

__version__ = "0.1.0"
