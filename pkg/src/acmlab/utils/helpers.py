"""Helper utility functions."""

import numpy as np

from acmlab.errors import ConfigError


def accuracy(pred, labels, mask) -> float:
    """Fraction of correctly predicted labels on the nodes selected by `mask`.

    An empty mask scores 0.0.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.mean(np.asarray(pred)[mask] == np.asarray(labels)[mask]))


def mean_std(values) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (0.0 for a single value)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0.0, 0.0
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), std


def parse_int_list(text: str) -> list[int]:
    """Parse '5,60,120' into [5, 60, 120].

    Raises:
        ConfigError: empty list or a non-integer entry
    """
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ConfigError("expected a comma-separated list of integers")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"expected integers, got {text!r}") from None


def format_duration(total_seconds: float) -> str:
    """Format seconds compactly: '1h 02m', '3m 05s', '12.4s'."""
    if total_seconds < 60:
        return f"{total_seconds:.1f}s"
    minutes, seconds = divmod(int(round(total_seconds)), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}h {minutes:02d}m"
    return f"{minutes}m {seconds:02d}s"


def format_accuracy(mean: float, std: float) -> str:
    """'78.5 ± 1.2' in percentage points."""
    return f"{100 * mean:.1f} ± {100 * std:.1f}"
