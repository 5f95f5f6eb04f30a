"""Distance functions the contraction checks are measured in."""

import numpy as np
from scipy.spatial.distance import pdist, squareform

from acmlab.engine.manifold import (
    ManifoldSpec,
    manifold_distance,
    pairwise_distances,
    project_pu,
)
from acmlab.errors import ConfigError, ShapeMismatch


class EuclideanMetric:
    """Plain Euclidean distance between embedding rows."""

    name = "euclidean"

    def distance(self, A, B) -> np.ndarray:
        return np.linalg.norm(np.asarray(A, dtype=np.float64) - np.asarray(B, dtype=np.float64), axis=-1)

    def pairwise(self, H) -> np.ndarray:
        return squareform(self.pair_values(H))

    def pair_values(self, H) -> np.ndarray:
        """Distances of all pairs i < j (condensed form)."""
        return pdist(np.atleast_2d(np.asarray(H, dtype=np.float64)))

    def to_reference(self, H, x) -> np.ndarray:
        return self.distance(np.atleast_2d(H), np.asarray(x, dtype=np.float64)[None, :])

    def sample(self, rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
        return rng.standard_normal((n, dim))

    def __repr__(self):
        return "EuclideanMetric()"


class ManifoldMetric:
    """Geodesic distance on M_U; every row it sees must lie on the manifold."""

    name = "manifold"

    def __init__(self, m: ManifoldSpec):
        self.m = m

    @classmethod
    def sphere(cls, dim: int) -> "ManifoldMetric":
        return cls(ManifoldSpec.identity(dim))

    def distance(self, A, B) -> np.ndarray:
        return np.atleast_1d(manifold_distance(A, B, self.m))

    def pairwise(self, H) -> np.ndarray:
        return pairwise_distances(H, self.m)

    def pair_values(self, H) -> np.ndarray:
        D = self.pairwise(H)
        return D[np.triu_indices(D.shape[0], k=1)]

    def to_reference(self, H, x) -> np.ndarray:
        return self.distance(np.atleast_2d(H), np.asarray(x, dtype=np.float64)[None, :])

    def sample(self, rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
        if dim != self.m.dim:
            raise ShapeMismatch(f"metric lives in dimension {self.m.dim}, asked for {dim}")
        return project_pu(rng.standard_normal((n, dim)), self.m)

    def _to_sphere(self, y):
        return np.asarray(y, dtype=np.float64) * np.sqrt(self.m.u_diag)

    def _from_sphere(self, z):
        return z / np.sqrt(self.m.u_diag)

    def ring_around_antipode(self, rng: np.random.Generator, x, count: int, radius: float) -> np.ndarray:
        """`count` points at distance `radius` from the antipode of x, in random directions.

        Any positive-weight average of such points, pushed back onto M_U,
        lands strictly closer to the antipode (so strictly further from x)
        unless the points coincide.
        """
        p = self._to_sphere(x)
        v = rng.standard_normal((count, p.size))
        v -= np.outer(v @ p, p)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        z = -np.cos(radius) * p + np.sin(radius) * v
        return self._from_sphere(z)

    def __repr__(self):
        return f"ManifoldMetric(u_diag={self.m.u_diag.tolist()})"


def metric_for(kind: str, dim: int = 2, u_diag=None):
    """Build a metric from its name ("euclidean" or "manifold")."""
    if kind == EuclideanMetric.name:
        return EuclideanMetric()
    if kind == ManifoldMetric.name:
        if u_diag is None:
            return ManifoldMetric.sphere(dim)
        return ManifoldMetric(ManifoldSpec(u_diag=np.asarray(u_diag, dtype=np.float64)))
    raise ConfigError(f"unknown metric {kind!r}; use 'euclidean' or 'manifold'")
