"""Transasymptotic expansions and movable-singularity arrays for nonlinear
ODE systems near a rank-one irregular singular point."""

from .errors import (
    ChartAmbiguous,
    DegreeCapExceeded,
    InsufficientCoefficients,
    NewtonDiverged,
    NoBlowup,
    NotConverging,
    OnBranchCut,
    OscillatoryCoefficients,
    OutsideReliableDisk,
    PoleOfOracle,
    ResonantOrder,
    ScalePastBranch,
    SheetUnreachable,
    SingularApproach,
    StepUnderflow,
    TransasymError,
    UnknownLabel,
    ZeroC,
)
from .series import (
    AnalyticGerm,
    InvXSeries,
    LinearSeriesSolution,
    TaylorSeries,
    germ_compose,
    series_field_solve_linear,
    series_mul,
)
from .systems import (
    BUILTIN_LABELS,
    CoordinateMap,
    DiagnosticsReport,
    NormalSystem,
    StokesData,
    builtin,
    builtin_map,
    identity_map,
    map_point,
    stokes_directions,
    validate_system,
)
from .expansion import (
    GevreyFit,
    TwoScaleExpansion,
    build_expansion,
    eval_two_scale,
    formal_power_series,
    gevrey_fit,
    least_term_index,
)
from .singular import (
    ArrayEntry,
    ContinuationResult,
    RadiusEstimate,
    SingularityArray,
    continue_f0,
    predict_array,
    radius_estimate,
)
from .validate import (
    CEstimate,
    ComparisonReport,
    PathSpec,
    PoleObservation,
    Trajectory,
    ValidationRun,
    anchor_point,
    compare_arrays,
    detect_singularity,
    extract_C,
    extraction_ladder,
    hunt_singularity,
    integrate_path,
    ladder_radii,
    run_validation,
)
from . import oracles

__version__ = "0.1.0"
