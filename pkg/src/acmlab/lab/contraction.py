"""Empirical checks of contraction, collapse and non-contraction.

An aggregation Agg is contracted when
  (1) a neighborhood whose rows are all equal maps to that same row, and
  (2) for every reference point x, d(x, Agg(H)_i) never exceeds the largest
      d(x, H_j) over the closed neighborhood of i, and falls strictly below it
      unless that neighborhood is constant.
Sampling can refute this but never prove it, so verdicts are three-valued.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable, Optional

import numpy as np
import pandas as pd

from acmlab.config.constants import (
    MAX_STORED_SNAPSHOTS,
    MONOTONE_SLACK,
    STRICTNESS_MARGIN,
)
from acmlab.engine.graph import AggregatorKind, Graph, degree_scaling, make_aggregator, spmm
from acmlab.engine.manifold import ManifoldSpec, project_pu
from acmlab.engine.optim import make_rng
from acmlab.errors import ConfigError, GraphNotConnected, ShapeMismatch
from acmlab.lab.metrics import EuclideanMetric, ManifoldMetric

logger = logging.getLogger(__name__)

AggFn = Callable[[np.ndarray], np.ndarray]


class Verdict(StrEnum):
    CONSISTENT = "consistent_with_contracted"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


# --- trajectories --------------------------------------------------------------

@dataclass
class Trajectory:
    """Iterates H^(k) of an aggregation plus per-step distance statistics.

    Only every `stride`-th embedding is kept in `snapshots` (the final one is
    always kept); `stats` has one row per step 0..steps.
    """

    snapshots: list
    snapshot_steps: list
    stats: pd.DataFrame

    @property
    def n_steps(self) -> int:
        return len(self.stats) - 1

    @property
    def step_stats(self) -> pd.DataFrame:
        return self.stats

    def to_csv(self, path: str) -> None:
        self.stats.to_csv(path, index=False, float_format="%.17g")


def _step_stats(H, metric, reference) -> tuple[float, float, float]:
    pairs = metric.pair_values(H)
    return (
        float(pairs.max(initial=0.0)),
        float(pairs.mean()) if pairs.size else 0.0,
        float(metric.to_reference(H, reference).max(initial=0.0)),
    )


def iterate(agg_fn: AggFn, H0, steps: int, metric, reference=None,
            max_snapshots: int = MAX_STORED_SNAPSHOTS) -> Trajectory:
    """Run H^(k+1) = agg_fn(H^(k)) for `steps` steps and record statistics.

    Args:
        agg_fn: embedding -> embedding of the same shape
        H0: n x d starting embedding (rows on M_U for a manifold metric)
        steps: number of aggregation steps
        metric: EuclideanMetric or ManifoldMetric
        reference: point for max_to_ref (defaults to the first row of H0)
        max_snapshots: bound on stored embeddings

    Raises:
        ShapeMismatch: agg_fn changed the shape
    """
    H = np.array(H0, dtype=np.float64)
    reference = H[0].copy() if reference is None else np.asarray(reference, dtype=np.float64)
    stride = max(1, math.ceil(steps / max_snapshots)) if steps else 1

    snapshots, snapshot_steps = [H.copy()], [0]
    rows = [(0, *_step_stats(H, metric, reference))]
    for k in range(1, steps + 1):
        nxt = np.asarray(agg_fn(H), dtype=np.float64)
        if nxt.shape != H.shape:
            raise ShapeMismatch(f"aggregation changed shape {H.shape} -> {nxt.shape}")
        H = nxt
        rows.append((k, *_step_stats(H, metric, reference)))
        if k % stride == 0 or k == steps:
            snapshots.append(H.copy())
            snapshot_steps.append(k)

    stats = pd.DataFrame(rows, columns=["step", "max_pairwise", "mean_pairwise", "max_to_ref"])
    return Trajectory(snapshots=snapshots, snapshot_steps=snapshot_steps, stats=stats)


def reference_profile(agg_fn: AggFn, H0, x, steps: int, metric) -> np.ndarray:
    """max_i d(x, H^(k)_i) for k = 0..steps, without storing the iterates."""
    H = np.array(H0, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(steps + 1)
    out[0] = metric.to_reference(H, x).max()
    for k in range(1, steps + 1):
        H = agg_fn(H)
        out[k] = metric.to_reference(H, x).max()
    return out


def is_non_increasing(values, slack: float = MONOTONE_SLACK) -> bool:
    return bool(np.all(np.diff(np.asarray(values, dtype=np.float64)) <= slack))


# --- contraction conditions ----------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """Embedding H and reference x on which node `node` is not strictly pulled toward x."""

    node: int
    H: np.ndarray
    x: np.ndarray


@dataclass
class ContractionReport:
    condition1_violations: int = 0
    condition1_worst: float = 0.0
    condition2_violations: int = 0
    condition2_worst: float = 0.0
    equality_without_identical: int = 0
    samples: int = 0
    verdict: Verdict = Verdict.INCONCLUSIVE
    witness: Optional[dict] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "condition1": {"violations": self.condition1_violations, "worst": self.condition1_worst},
            "condition2": {"violations": self.condition2_violations, "worst": self.condition2_worst},
            "equality_without_identical": self.equality_without_identical,
            "samples": self.samples,
            "verdict": str(self.verdict),
            "witness": self.witness,
            "notes": list(self.notes),
        }


def _neighborhoods(g: Graph):
    rows, cols = g.augmented_pattern()
    starts = np.flatnonzero(np.r_[True, rows[1:] != rows[:-1]])
    sizes = np.diff(np.r_[starts, len(rows)])
    return rows, cols, starts, sizes


def _condition2(agg_fn, H, x, metric, pattern, tol):
    """Condition 2 at every node.

    Returns:
        (largest excess, node where it occurs, violated?, equality at a
        non-constant neighborhood?, any non-constant neighborhood?)
    """
    rows, cols, starts, _ = pattern
    H_bar = np.asarray(agg_fn(H), dtype=np.float64)
    d_bar = metric.to_reference(H_bar, x)
    d = metric.to_reference(H, x)
    nbr_max = np.maximum.reduceat(d[cols], starts)
    spread = np.maximum.reduceat(metric.distance(H[cols], H[rows]), starts)
    excess = d_bar - nbr_max
    non_constant = spread > STRICTNESS_MARGIN
    violated = excess > tol
    equal = ~violated & (excess >= -tol) & non_constant
    worst = int(np.argmax(excess))
    return float(excess[worst]), worst, bool(violated.any()), bool(equal.any()), bool(non_constant.any())


def symmetric_witness(g: Graph, m: Optional[ManifoldSpec] = None, dim: int = 2,
                     angle: float = math.pi / 2) -> Optional[Witness]:
    """Symmetric configuration showing an aggregation on M_U is not contracted.

    Needs a node u0 with at least two neighbors. u0 sits at p, its neighbors
    are paired off at cos(angle)·p ± sin(angle)·r (an odd one out sits at p),
    every other node sits at p, and x = -p. Any aggregation that weights a
    symmetric pair equally maps u0 back to p, which is as far from x as its
    farthest neighbor although the neighborhood is not constant.

    Returns:
        the witness, or None when no node has |Ñ(u0)| > 2
    """
    m = ManifoldSpec.identity(dim) if m is None else m
    if m.dim < 2:
        raise ShapeMismatch("a non-contraction witness needs dimension >= 2")
    _, _, _, sizes = _neighborhoods(g)
    candidates = np.flatnonzero(sizes > 2)
    if candidates.size == 0:
        return None
    u0 = int(candidates[0])

    p = np.zeros(m.dim)
    p[0] = 1.0
    r = np.zeros(m.dim)
    r[1] = 1.0
    Z = np.tile(p, (g.n_nodes, 1))
    nbrs = g.neighbors_of(u0)
    for k in range(len(nbrs) // 2):
        Z[nbrs[2 * k]] = math.cos(angle) * p + math.sin(angle) * r
        Z[nbrs[2 * k + 1]] = math.cos(angle) * p - math.sin(angle) * r
    root = np.sqrt(m.u_diag)
    return Witness(node=u0, H=Z / root, x=-p / root)


def _verdict(evidence: bool, exercised: bool, claims_allowed: bool) -> Verdict:
    if evidence:
        return Verdict.REFUTED if claims_allowed else Verdict.INCONCLUSIVE
    return Verdict.CONSISTENT if exercised else Verdict.INCONCLUSIVE


def check_contracted(agg_fn: AggFn, g: Graph, metric, n_samples: int = 1000,
                     tol: float = 1e-12, seed: int = 0, dim: int = 2) -> ContractionReport:
    """Sample embeddings and reference points and test both contraction conditions.

    Condition 1 sets every row of a random Ñ(u_i) equal to H_i and checks that
    row i comes back unchanged. Condition 2 compares d(x, Agg(H)_i) with the
    largest d(x, H_j) over Ñ(u_i) at every node. Every other sample is an
    extremal sample: Euclidean samples move the neighbor farthest from x into
    row i; manifold samples place the neighborhood on a ring around the
    antipode of x. Manifold refutations are only claimed on graphs with a node
    of |Ñ(u0)| > 2, where the symmetric witness configuration is also tried.

    Args:
        agg_fn: embedding -> embedding
        g: graph the aggregation acts on
        metric: EuclideanMetric or ManifoldMetric
        n_samples: random samples (>= 1)
        tol: slack for "equal" and "not larger"
        seed: random seed
        dim: embedding dimension (must match a manifold metric)
    """
    if n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples}")
    on_manifold = isinstance(metric, ManifoldMetric)
    if on_manifold:
        dim = metric.m.dim
    rng = make_rng(seed, "check-contracted")
    pattern = _neighborhoods(g)
    _, cols, starts, sizes = pattern
    claims_allowed = not on_manifold or bool((sizes > 2).any())
    n = g.n_nodes

    report = ContractionReport()
    exercised = False
    for s in range(n_samples):
        H = metric.sample(rng, n, dim)
        x = metric.sample(rng, 1, dim)[0]
        i = int(rng.integers(n))
        nbrs = cols[starts[i]:starts[i] + sizes[i]]

        constant = H.copy()
        constant[nbrs] = H[i]
        err = float(metric.distance(np.asarray(agg_fn(constant))[i:i + 1], H[i:i + 1])[0])
        if err > tol:
            report.condition1_violations += 1
        report.condition1_worst = max(report.condition1_worst, err)

        if s % 2:
            if on_manifold:
                H[nbrs] = metric.ring_around_antipode(rng, x, len(nbrs), rng.uniform(0.2, 1.2))
            else:
                far = nbrs[int(np.argmax(metric.to_reference(H[nbrs], x)))]
                H[[i, far]] = H[[far, i]]

        excess, node, violated, equal, non_constant = _condition2(agg_fn, H, x, metric, pattern, tol)
        exercised |= non_constant
        report.condition2_worst = max(report.condition2_worst, excess) if s else excess
        report.condition2_violations += violated
        report.equality_without_identical += equal
        if (violated or equal) and report.witness is None:
            report.witness = {"sample": s, "node": node, "excess": excess, "x": x.tolist()}
    report.samples = n_samples

    if on_manifold and claims_allowed:
        w = symmetric_witness(g, metric.m)
        excess, _, violated, equal, _ = _condition2(agg_fn, w.H, w.x, metric, pattern, tol)
        report.samples += 1
        report.condition2_violations += violated
        report.equality_without_identical += equal
        report.condition2_worst = max(report.condition2_worst, excess)
        if violated or equal:
            report.witness = {"sample": "symmetric", "node": w.node, "excess": excess, "x": w.x.tolist()}
            exercised = True
    elif on_manifold:
        report.notes.append("no node with more than two closed neighbors; refutation not claimed")

    evidence = bool(
        report.condition1_violations or report.condition2_violations
        or report.equality_without_identical
    )
    report.verdict = _verdict(evidence, exercised, claims_allowed)
    logger.info(
        "contraction check on %d nodes (%s): %s after %d samples",
        n, type(metric).__name__, report.verdict, report.samples,
    )
    return report


def check_equiv_contracted_sym(g: Graph, lam: float, H0, steps: int) -> float:
    """Largest |L_sym^k H0 - D̃^{1/2} L_rw^k D̃^{-1/2} H0| over k = 1..steps.

    k = 0 is the identity on both sides and contributes zero.
    """
    L_sym = make_aggregator(g, AggregatorKind.SYM_NORM, lam)
    L_rw = make_aggregator(g, AggregatorKind.ROW_NORM, lam)
    root = degree_scaling(g, 0.5)[:, None]
    A = np.array(H0, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    B = A / root
    deviation = 0.0
    for _ in range(steps):
        A = spmm(L_sym, A)
        B = spmm(L_rw, B)
        deviation = max(deviation, float(np.abs(A - root * B).max(initial=0.0)))
    return deviation


# --- collapse --------------------------------------------------------------------

@dataclass(frozen=True)
class NotCollapsed:
    max_steps: int
    final_max_pairwise: float


@dataclass(frozen=True)
class ComponentCollapse:
    nodes: np.ndarray
    steps: object
    limit: np.ndarray


COLLAPSE_KINDS = ("row_norm", "sym_norm", "acm")


def _collapse_dynamics(g: Graph, kind: str, lam: float, dim: int):
    """(step function, rescaling applied before measuring, metric)."""
    if kind not in COLLAPSE_KINDS:
        raise ConfigError(f"collapse kind must be one of {COLLAPSE_KINDS}, got {kind!r}")
    if kind == "sym_norm":
        L = make_aggregator(g, AggregatorKind.SYM_NORM, lam)
        inv_root = degree_scaling(g, -0.5)[:, None]
        return (lambda H: spmm(L, H)), (lambda H: H * inv_root), EuclideanMetric()
    L = make_aggregator(g, AggregatorKind.ROW_NORM, lam)
    if kind == "row_norm":
        return (lambda H: spmm(L, H)), (lambda H: H), EuclideanMetric()
    sphere = ManifoldSpec.identity(dim)
    return (lambda H: project_pu(spmm(L, H), sphere)), (lambda H: H), ManifoldMetric(sphere)


def _as_matrix(H0):
    H = np.array(H0, dtype=np.float64)
    return H[:, None] if H.ndim == 1 else H


def collapse_check(g: Graph, kind: str, lam: float, H0, tol: float = 1e-6,
                   max_steps: int = 10_000):
    """First k at which the max pairwise distance of the iterates drops below tol.

    kind "row_norm" iterates (1-λ)I + λD̃⁻¹Ã; "sym_norm" iterates the symmetric
    operator and measures after rescaling by D̃^{-1/2}; "acm" projects each
    row-normalised step onto the unit sphere and measures geodesic distance.

    Returns:
        the step count, or NotCollapsed(max_steps, final statistic)

    Raises:
        GraphNotConnected: g has more than one component
    """
    if not g.is_connected():
        raise GraphNotConnected(g.connected_components()[0])
    H = _as_matrix(H0)
    step, rescale, metric = _collapse_dynamics(g, kind, lam, H.shape[1])
    stat = float("inf")
    for k in range(max_steps + 1):
        stat = float(metric.pair_values(rescale(H)).max(initial=0.0))
        if stat < tol:
            logger.debug("%s collapse after %d steps", kind, k)
            return k
        if k < max_steps:
            H = step(H)
    return NotCollapsed(max_steps=max_steps, final_max_pairwise=stat)


def collapse_by_component(g: Graph, kind: str, lam: float, H0, tol: float = 1e-6,
                          max_steps: int = 10_000) -> list:
    """Collapse check run separately on every connected component.

    Returns:
        one ComponentCollapse per component, with the steps it needed (or
        NotCollapsed) and the mean of its rescaled rows at the end
    """
    H = _as_matrix(H0)
    step, rescale, metric = _collapse_dynamics(g, kind, lam, H.shape[1])
    n_comp, labels = g.connected_components()
    members = [np.flatnonzero(labels == c) for c in range(n_comp)]
    done = {}
    k = 0
    while True:
        scaled = rescale(H)
        for c, nodes in enumerate(members):
            if c not in done and metric.pair_values(scaled[nodes]).max(initial=0.0) < tol:
                done[c] = k
        if len(done) == n_comp or k == max_steps:
            break
        H = step(H)
        k += 1

    scaled = rescale(H)
    out = []
    for c, nodes in enumerate(members):
        steps = done.get(c)
        if steps is None:
            steps = NotCollapsed(max_steps, float(metric.pair_values(scaled[nodes]).max(initial=0.0)))
        out.append(ComponentCollapse(nodes=nodes, steps=steps, limit=scaled[nodes].mean(axis=0)))
    return out
