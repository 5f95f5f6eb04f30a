"""Run configuration: dataclasses loaded from a single JSON document."""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from enum import StrEnum
from typing import Optional

from . import constants as C
from acmlab.errors import ConfigError

logger = logging.getLogger(__name__)


class Arch(StrEnum):
    SGC = "sgc"
    GCN = "gcn"
    GAT = "gat"


class Variant(StrEnum):
    VANILLA = "vanilla"
    ACM = "acm"
    ACM_STAR = "acm_star"


class Scenario(StrEnum):
    STANDARD = "standard"
    MISSING_FEATURE = "missing_feature"


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and size of one GNN.

    `n_layers` counts aggregation steps for every architecture, so depth 64
    means 64 applications of the graph operator for SGC, GCN and GAT alike.
    SGC also accepts depth 0, a linear classifier on the (projected) features.
    `n_classes = 0` means "take it from the dataset".
    """

    arch: Arch = Arch.SGC
    variant: Variant = Variant.ACM
    n_layers: int = 2
    hidden_dim: int = C.DEFAULT_HIDDEN
    n_classes: int = 0
    dropout_p: float = C.DEFAULT_DROPOUT
    leaky_relu_alpha: float = C.DEFAULT_LEAKY_RELU_ALPHA
    hyperplane_b: float = C.DEFAULT_HYPERPLANE_B
    lam: float = C.DEFAULT_LAMBDA

    def __post_init__(self):
        object.__setattr__(self, "arch", _enum(Arch, self.arch, "model.arch"))
        object.__setattr__(self, "variant", _enum(Variant, self.variant, "model.variant"))
        min_layers = 0 if self.arch == Arch.SGC else 1
        if self.n_layers < min_layers:
            raise ConfigError(f"model.n_layers must be >= {min_layers} for {self.arch}, got {self.n_layers}")
        if self.hidden_dim < 1:
            raise ConfigError(f"model.hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.n_classes < 0:
            raise ConfigError(f"model.n_classes must be >= 0, got {self.n_classes}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError(f"model.dropout_p must lie in [0, 1), got {self.dropout_p}")
        if not 0.0 < self.lam <= 1.0:
            raise ConfigError(f"model.lam must lie in (0, 1], got {self.lam}")

    @property
    def is_acm(self) -> bool:
        return self.variant != Variant.VANILLA

    @property
    def acm_star(self) -> bool:
        return self.variant == Variant.ACM_STAR


@dataclass(frozen=True)
class TrainConfig:
    lr: float = C.DEFAULT_LR
    weight_decay: float = C.DEFAULT_WEIGHT_DECAY
    max_epochs: int = C.DEFAULT_MAX_EPOCHS
    patience: int = C.DEFAULT_PATIENCE
    seed: int = C.DEFAULT_SEED
    repeats: int = C.DEFAULT_REPEATS

    def __post_init__(self):
        if self.lr < 0:
            raise ConfigError(f"train.lr must be >= 0, got {self.lr}")
        if self.weight_decay < 0:
            raise ConfigError(f"train.weight_decay must be >= 0, got {self.weight_decay}")
        if self.max_epochs < 1:
            raise ConfigError(f"train.max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 1:
            raise ConfigError(f"train.patience must be >= 1, got {self.patience}")
        if self.repeats < 1:
            raise ConfigError(f"train.repeats must be >= 1, got {self.repeats}")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a stochastic-block-model dataset."""

    n: int = 200
    n_blocks: int = 2
    p_in: float = 0.1
    p_out: float = 0.01
    feat_dim: int = 8
    sigma: float = C.SBM_DEFAULT_SIGMA
    seed: int = 0


@dataclass(frozen=True)
class DatasetSpec:
    """Either a dataset directory (`path`) or a synthetic SBM (`synth`)."""

    path: Optional[str] = None
    synth: Optional[SynthSpec] = None

    def __post_init__(self):
        if (self.path is None) == (self.synth is None):
            raise ConfigError("dataset needs exactly one of 'path' or 'synth'")


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec = field(default_factory=lambda: DatasetSpec(synth=SynthSpec()))
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    scenario: Scenario = Scenario.STANDARD
    output_dir: Optional[str] = None
    preset: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", _enum(Scenario, self.scenario, "scenario"))

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, train=replace(self.train, seed=seed))

    def with_layers(self, n_layers: int) -> "RunConfig":
        return replace(self, model=replace(self.model, n_layers=n_layers))

    def with_output_dir(self, output_dir: str) -> "RunConfig":
        return replace(self, output_dir=output_dir)

    def with_preset(self, preset: str) -> "RunConfig":
        """Overwrite lr, weight decay, dropout and hidden size from a named preset."""
        train_fields, model_fields = preset_fields(preset)
        return replace(
            self,
            preset=preset,
            train=replace(self.train, **train_fields),
            model=replace(self.model, **model_fields),
        )

    def with_scenario(self, scenario) -> "RunConfig":
        return replace(self, scenario=scenario)

    def to_dict(self) -> dict:
        return asdict(self)


def preset_fields(preset: str) -> tuple[dict, dict]:
    """(TrainConfig fields, ModelConfig fields) set by a named preset.

    Raises:
        ConfigError: unknown preset name
    """
    if preset not in C.HYPERPARAMETER_PRESETS:
        raise ConfigError(
            f"unknown preset {preset!r}; choose from {sorted(C.HYPERPARAMETER_PRESETS)}"
        )
    values = C.HYPERPARAMETER_PRESETS[preset]
    return (
        {"lr": values["lr"], "weight_decay": values["weight_decay"]},
        {"dropout_p": values["dropout_p"], "hidden_dim": values["hidden_dim"]},
    )


def _enum(enum_cls, value, name):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{name} must be one of {allowed}; got {value!r}") from None


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be a JSON object")
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad '{section}' section: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated RunConfig from a plain dict.

    A `preset` name (see HYPERPARAMETER_PRESETS) fills lr, weight decay,
    dropout and hidden size before the explicit `model`/`train` values apply.

    Raises:
        ConfigError: on unknown keys, bad types or out-of-range values
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    allowed = {"dataset", "model", "train", "scenario", "output_dir", "preset"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    model_data = dict(data.get("model") or {})
    train_data = dict(data.get("train") or {})
    preset = data.get("preset")
    if preset is not None:
        train_fields, model_fields = preset_fields(preset)
        train_data = {**train_fields, **train_data}
        model_data = {**model_fields, **model_data}

    ds_data = data.get("dataset") or {"synth": {}}
    if not isinstance(ds_data, dict):
        raise ConfigError("'dataset' must be a JSON object")
    synth = ds_data.get("synth")
    dataset = DatasetSpec(
        path=ds_data.get("path"),
        synth=None if synth is None else _build(SynthSpec, synth, "dataset.synth"),
    )

    return RunConfig(
        dataset=dataset,
        model=_build(ModelConfig, model_data, "model"),
        train=_build(TrainConfig, train_data, "train"),
        scenario=data.get("scenario", Scenario.STANDARD),
        output_dir=data.get("output_dir"),
        preset=preset,
    )


def load_config(path: str) -> RunConfig:
    """Load a RunConfig from a JSON file.

    Relative dataset paths are resolved against the config file's directory.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None

    ds = data.get("dataset") if isinstance(data, dict) else None
    if isinstance(ds, dict) and ds.get("path") and not os.path.isabs(ds["path"]):
        ds["path"] = os.path.join(os.path.dirname(os.path.abspath(path)), ds["path"])

    cfg = config_from_dict(data)
    logger.debug("loaded config from %s: %s", path, cfg)
    return cfg
