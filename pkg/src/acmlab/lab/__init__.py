"""Contraction, collapse and non-contraction experiments on small graphs."""

from .metrics import EuclideanMetric, ManifoldMetric, metric_for
from .contraction import (
    Verdict,
    Trajectory,
    ContractionReport,
    NotCollapsed,
    iterate,
    check_contracted,
    check_equiv_contracted_sym,
    collapse_check,
    collapse_by_component,
    symmetric_witness,
    reference_profile,
    is_non_increasing,
)

__all__ = [
    # metrics
    "EuclideanMetric",
    "ManifoldMetric",
    "metric_for",
    # contraction
    "Verdict",
    "Trajectory",
    "ContractionReport",
    "NotCollapsed",
    "iterate",
    "check_contracted",
    "check_equiv_contracted_sym",
    "collapse_check",
    "collapse_by_component",
    "symmetric_witness",
    "reference_profile",
    "is_non_increasing",
]
