"""Configuration constants and run settings."""

from .constants import (
    EPS_NORM,
    CENTER_GUARD,
    ON_MANIFOLD_TOL,
    DEFAULT_HYPERPLANE_B,
    STRICTNESS_MARGIN,
    HYPERPARAMETER_PRESETS,
    DEFAULT_LAYER_GRID,
    CSV_SCHEMAS,
)
from .settings import (
    Arch,
    Variant,
    Scenario,
    SynthSpec,
    ModelConfig,
    TrainConfig,
    DatasetSpec,
    RunConfig,
    load_config,
    config_from_dict,
    preset_fields,
)

__all__ = [
    # constants
    "EPS_NORM",
    "CENTER_GUARD",
    "ON_MANIFOLD_TOL",
    "DEFAULT_HYPERPLANE_B",
    "STRICTNESS_MARGIN",
    "HYPERPARAMETER_PRESETS",
    "DEFAULT_LAYER_GRID",
    "CSV_SCHEMAS",
    # settings
    "Arch",
    "Variant",
    "Scenario",
    "SynthSpec",
    "ModelConfig",
    "TrainConfig",
    "DatasetSpec",
    "RunConfig",
    "load_config",
    "config_from_dict",
    "preset_fields",
]
