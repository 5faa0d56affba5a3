"""Water-quality regression toolkit: synthetic data, six regressors, importance and forecasts."""

from ._wqst import (
    Model,
    WqstError,
    __version__,
    classify_distance,
    cross_validated_rmse,
    default_hyperparameters,
    fit,
    forecast,
    haversine_km,
    importance_gain,
    importance_permutation,
    load_model,
    major_of,
    model_from_text,
    model_kinds,
    r_squared,
    rmse,
    run_cli,
    spatio_temporal_row,
    synthetic_design,
    synthetic_records,
)

__all__ = [
    "Model",
    "WqstError",
    "__version__",
    "classify_distance",
    "cross_validated_rmse",
    "default_hyperparameters",
    "fit",
    "forecast",
    "haversine_km",
    "importance_gain",
    "importance_permutation",
    "load_model",
    "major_of",
    "model_from_text",
    "model_kinds",
    "r_squared",
    "rmse",
    "run_cli",
    "spatio_temporal_row",
    "synthetic_design",
    "synthetic_records",
]
