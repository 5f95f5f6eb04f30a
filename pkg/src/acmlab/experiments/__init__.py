"""Training, depth sweeps, dispersion diagnostics and the theory battery."""

from .trainer import FailedRepeat, RepeatResult, RunSummary, prepare_dataset, train, train_repeat
from .sweep import SweepResult, sweep_layers
from .dispersion import dispersion_profile, summarize_dispersion
from .diagnose import DispersionReport, diagnose
from .theory import CheckOutcome, run_theory_checks

__all__ = [
    # trainer
    "FailedRepeat",
    "RepeatResult",
    "RunSummary",
    "prepare_dataset",
    "train",
    "train_repeat",
    # sweep
    "SweepResult",
    "sweep_layers",
    # dispersion
    "dispersion_profile",
    "summarize_dispersion",
    # diagnose
    "DispersionReport",
    "diagnose",
    # theory
    "CheckOutcome",
    "run_theory_checks",
]
