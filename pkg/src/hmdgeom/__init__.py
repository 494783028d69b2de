"""Geometric modeling of rendering and viewing errors in stereo HMDs."""

from .geometry import (
    CONVERGED,
    DIVERGED,
    LEFT,
    RIGHT,
    CustomOffsets,
    DegenerateRayError,
    DirectPassthrough,
    DivergedError,
    ErrorSpec,
    EyeRelief,
    FixationBehindEyeError,
    HmdGeometry,
    IpdIad,
    PerceptionResult,
    Point3,
    PointBehindCameraError,
    ViewerGeometry,
    apply_ocular_parallax,
    no_error,
    perceive_point,
    perceive_scene,
    project_to_display,
    resolve_offsets,
    scenario,
    triangulate,
)
from .frames import (
    EyeOffsetRecord,
    ReachSample,
    WrongConditionError,
    egocentric_to_simulated_world,
    hmd_to_egocentric,
    interpret_blind_reach,
    interpret_sighted_reach,
)
from .pipeline import (
    EquivalenceReport,
    PipelineConfig,
    PipelineTrace,
    canonical_configs,
    equivalence_report,
    simulate_pipeline_point,
)
from .psychometrics import (
    DegenerateDataError,
    MissingConditionError,
    ObserverConfig,
    PsychometricFit,
    PsychometricModel,
    TrialBin,
    TrialSet,
    bootstrap_fit,
    fit_slope,
    logistic_pc,
    neg_log_likelihood,
    simulate_2ifc_trials,
    slope_sign_summary,
)
from .fields import (
    DistortionField,
    FieldGrid,
    PredictionTable,
    export_field,
    generate_field,
    predict_reach_bias,
)

__version__ = "0.1.0"
