"""FBG shape sensing, Bezier encoding and magnetic-field-to-shape learning."""

__version__ = "0.1.0"

from ._core import (
    BezierCurve,
    FbgFrame,
    FitResult,
    ForestModel,
    FrameMode,
    MagshapeError,
    SensorGeometry,
    arc_length,
    chord_length_params,
    compensated_strain,
    compute_metrics,
    curvature_from_strain,
    field_at,
    fit_fixed_endpoints,
    integrate_pcc,
    levene_test,
    lilliefors_test,
    load_forest,
    reconstruct_frame,
    save_forest,
    shape_error,
    strain_from_curvature,
    train_forest,
    welch_t_test,
)

__all__ = [
    "BezierCurve",
    "FbgFrame",
    "FitResult",
    "ForestModel",
    "FrameMode",
    "MagshapeError",
    "SensorGeometry",
    "arc_length",
    "chord_length_params",
    "compensated_strain",
    "compute_metrics",
    "curvature_from_strain",
    "field_at",
    "fit_fixed_endpoints",
    "integrate_pcc",
    "levene_test",
    "lilliefors_test",
    "load_forest",
    "reconstruct_frame",
    "save_forest",
    "shape_error",
    "strain_from_curvature",
    "train_forest",
    "welch_t_test",
]
