"""Page rendering modules for the ACM Lab dashboard."""

from . import results
from . import theory
from . import geometry

__all__ = [
    "results",
    "theory",
    "geometry",
]
