"""Geometry of the compact hypersurface M_U = {x : x U x^T = 1}.

U is a positive diagonal matrix stored as its diagonal `u_diag`. All maps work
row-wise: pass a single vector of length d or an (n, d) matrix.

PF is a stereographic-style chart from M_U to the hyperplane N_b = {x_1 = b}
with center x0 = (a0, 0, ..., 0); PB maps any point of R^d back onto M_U along
the line through x0.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from acmlab.config.constants import (
    CENTER_GUARD,
    DEFAULT_HYPERPLANE_B,
    EPS_NORM,
    ON_MANIFOLD_TOL,
)
from acmlab.errors import (
    AtProjectionCenter,
    ConfigError,
    NearZeroVector,
    NotOnManifold,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """Positive diagonal U plus the PF/PB chart data derived from it."""

    u_diag: np.ndarray
    b: float = DEFAULT_HYPERPLANE_B
    eps_norm: float = EPS_NORM
    a0: float = field(init=False)
    x0: np.ndarray = field(init=False)

    def __post_init__(self):
        u = np.array(self.u_diag, dtype=np.float64).ravel()
        if u.size == 0 or not np.all(u > 0) or not np.all(np.isfinite(u)):
            raise ConfigError("u_diag must be a non-empty vector of positive finite reals")
        u.setflags(write=False)
        a0 = float(u[0] ** -0.5)
        if abs(self.b - a0) < CENTER_GUARD:
            raise ConfigError(f"hyperplane offset b={self.b} passes through the center a0={a0}")
        x0 = np.zeros_like(u)
        x0[0] = a0
        x0.setflags(write=False)
        object.__setattr__(self, "u_diag", u)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "x0", x0)

    @classmethod
    def identity(cls, dim: int, b: float = DEFAULT_HYPERPLANE_B) -> "ManifoldSpec":
        """U = I: M_U is the unit hypersphere."""
        return cls(u_diag=np.ones(dim), b=b)

    @property
    def dim(self) -> int:
        return self.u_diag.size

    def with_u(self, u_diag) -> "ManifoldSpec":
        return ManifoldSpec(u_diag=u_diag, b=self.b, eps_norm=self.eps_norm)


def _rows(x, m: ManifoldSpec):
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != m.dim:
        raise ShapeMismatch(f"vectors have dimension {arr.shape[1]}, manifold has {m.dim}")
    return arr, single


def _out(arr, single):
    return arr[0] if single else arr


def quadratic_form(x, m: ManifoldSpec) -> np.ndarray:
    """x U x^T per row."""
    arr, single = _rows(x, m)
    q = np.einsum("ij,j,ij->i", arr, m.u_diag, arr)
    return q[0] if single else q


def on_manifold(x, m: ManifoldSpec, tol: float = ON_MANIFOLD_TOL) -> bool:
    q = np.atleast_1d(quadratic_form(x, m))
    return bool(np.all(np.abs(q - 1.0) <= tol))


def project_pu(x, m: ManifoldSpec) -> np.ndarray:
    """P_U(x) = x / sqrt(x U x^T).

    Raises:
        NearZeroVector: x U x^T < eps_norm^2 for some row
    """
    arr, single = _rows(x, m)
    q = np.einsum("ij,j,ij->i", arr, m.u_diag, arr)
    bad = q < m.eps_norm ** 2
    if bad.any():
        raise NearZeroVector(np.flatnonzero(bad))
    return _out(arr / np.sqrt(q)[:, None], single)


def project_rows_pu(H, m: ManifoldSpec) -> tuple[np.ndarray, int]:
    """Row-wise P_U with near-zero rows replaced by x0.

    Returns:
        (projected rows, number of rows that fell back to x0)
    """
    arr, _ = _rows(H, m)
    q = np.einsum("ij,j,ij->i", arr, m.u_diag, arr)
    bad = q < m.eps_norm ** 2
    out = np.empty_like(arr)
    out[~bad] = arr[~bad] / np.sqrt(q[~bad])[:, None]
    out[bad] = m.x0
    n_bad = int(bad.sum())
    if n_bad:
        logger.debug("%d near-zero rows mapped to x0", n_bad)
    return out, n_bad


def push_forward(w, m: ManifoldSpec) -> np.ndarray:
    """PF(w) = ((b - a0) / (w1 - a0)) (w - x0) + x0, landing on N_b.

    Raises:
        AtProjectionCenter: |w1 - a0| < 1e-9
    """
    arr, single = _rows(w, m)
    t = arr[:, 0] - m.a0
    bad = np.abs(t) < CENTER_GUARD
    if bad.any():
        raise AtProjectionCenter(np.flatnonzero(bad))
    c = (m.b - m.a0) / t
    out = c[:, None] * (arr - m.x0) + m.x0
    return _out(out, single)


def push_back(v, m: ManifoldSpec) -> np.ndarray:
    """PB(v) = (-2 (v - x0) U x0^T / ((v - x0) U (v - x0)^T)) (v - x0) + x0.

    The output always satisfies y U y^T = 1: PB picks the second intersection
    of the line through x0 and v with M_U.

    Raises:
        AtProjectionCenter: v coincides with x0
    """
    arr, single = _rows(v, m)
    diff = arr - m.x0
    den = np.einsum("ij,j,ij->i", diff, m.u_diag, diff)
    bad = den < m.eps_norm ** 2
    if bad.any():
        raise AtProjectionCenter(np.flatnonzero(bad))
    num = -2.0 * diff[:, 0] * m.u_diag[0] * m.a0
    out = (num / den)[:, None] * diff + m.x0
    return _out(out, single)


def _angles(a, b):
    # 2·atan2(|a - b|, |a + b|) equals arccos(a·b) for unit vectors, without
    # arccos's loss of precision near 0 and π.
    return 2.0 * np.arctan2(
        np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1)
    )


def _check_on(arr, m, tol):
    q = np.einsum("ij,j,ij->i", arr, m.u_diag, arr)
    dev = np.abs(q - 1.0).max(initial=0.0)
    if dev > tol:
        raise NotOnManifold(float(dev))


def manifold_distance(x, y, m: ManifoldSpec, tol: float = ON_MANIFOLD_TOL):
    """U-spherical geodesic distance arccos(x U y^T) between points of M_U.

    Works row-wise when given matrices of equal shape.

    Raises:
        NotOnManifold: a point is further than `tol` from M_U
    """
    xa, single_x = _rows(x, m)
    ya, single_y = _rows(y, m)
    _check_on(xa, m, tol)
    _check_on(ya, m, tol)
    root = np.sqrt(m.u_diag)
    d = _angles(xa * root, ya * root)
    return float(d[0]) if (single_x and single_y) else d


def pairwise_distances(H, m: ManifoldSpec, tol: float = ON_MANIFOLD_TOL) -> np.ndarray:
    """n x n matrix of manifold distances between the rows of H."""
    arr, _ = _rows(H, m)
    _check_on(arr, m, tol)
    z = arr * np.sqrt(m.u_diag)
    return _angles(z[:, None, :], z[None, :, :])
