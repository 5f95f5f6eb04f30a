"""Synthetic graphs: stochastic block model datasets and small test graphs."""

import heapq
import logging

import numpy as np

from acmlab.config.constants import SBM_DEFAULT_SIGMA, SBM_TRAIN_PER_CLASS, SBM_VAL_PER_CLASS
from acmlab.engine.graph import Graph, build_graph
from acmlab.engine.optim import make_rng
from acmlab.errors import IndexOutOfRange, IndivisibleBlocks, InvalidProbability
from acmlab.utils.data_loaders import Dataset, Split

logger = logging.getLogger(__name__)


def synth_sbm(n: int = 200, n_blocks: int = 2, p_in: float = 0.1, p_out: float = 0.01,
              feat_dim: int = 8, sigma: float = SBM_DEFAULT_SIGMA, seed: int = 0) -> Dataset:
    """Stochastic block model with Gaussian block features.

    Nodes 0..n-1 are split into `n_blocks` equal consecutive blocks; an edge
    joins two nodes with probability p_in inside a block and p_out across.
    Each block gets a random unit-norm mean vector, and node features are that
    mean plus N(0, sigma^2) noise. Per class, 20 nodes go to train, 30 to val
    and the rest to test.

    Raises:
        InvalidProbability: p_in or p_out outside [0, 1]
        IndivisibleBlocks: n is not a multiple of n_blocks
    """
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise InvalidProbability(f"{name} must lie in [0, 1], got {p}")
    if n_blocks < 1 or n < 1 or n % n_blocks:
        raise IndivisibleBlocks(f"n={n} cannot be split into {n_blocks} equal blocks")
    if feat_dim < 1:
        raise IndexOutOfRange(f"feat_dim must be >= 1, got {feat_dim}")

    rng = make_rng(seed, "sbm")
    labels = np.repeat(np.arange(n_blocks), n // n_blocks)

    iu, ju = np.triu_indices(n, k=1)
    probs = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(len(probs)) < probs
    graph = build_graph(np.column_stack([iu[keep], ju[keep]]), n)

    means = rng.standard_normal((n_blocks, feat_dim))
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    features = means[labels] + sigma * rng.standard_normal((n, feat_dim))

    train, val, test = [], [], []
    for c in range(n_blocks):
        members = rng.permutation(np.flatnonzero(labels == c))
        train.append(members[:SBM_TRAIN_PER_CLASS])
        val.append(members[SBM_TRAIN_PER_CLASS:SBM_TRAIN_PER_CLASS + SBM_VAL_PER_CLASS])
        test.append(members[SBM_TRAIN_PER_CLASS + SBM_VAL_PER_CLASS:])
    split = Split(*(np.sort(np.concatenate(part)) for part in (train, val, test)))

    logger.info(
        "sbm: n=%d blocks=%d p_in=%g p_out=%g -> %d edges", n, n_blocks, p_in, p_out, graph.n_edges
    )
    return Dataset(graph=graph, features=features, labels=labels, split=split, n_classes=n_blocks)


def planted_modularity(g: Graph, labels) -> float:
    """Newman modularity of the partition given by `labels` (0 for an edgeless graph)."""
    labels = np.asarray(labels, dtype=np.int64)
    edges = g.edge_list()
    m = len(edges)
    if m == 0:
        return 0.0
    n_groups = int(labels.max()) + 1
    inside = labels[edges[:, 0]] == labels[edges[:, 1]]
    l_c = np.bincount(labels[edges[inside, 0]], minlength=n_groups)
    d_c = np.bincount(labels, weights=g.degrees, minlength=n_groups)
    return float(np.sum(l_c / m - (d_c / (2.0 * m)) ** 2))


def _prufer_tree(n: int, rng: np.random.Generator) -> list:
    if n <= 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64) + np.bincount(seq, minlength=n)
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, int(v))
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def random_connected_graph(n: int, extra_edges: int | None = None, seed: int = 0) -> Graph:
    """Uniform random spanning tree (via a Prüfer sequence) plus random extra edges.

    Args:
        n: number of nodes
        extra_edges: edges added on top of the tree (default n // 2, capped by
            the number of free node pairs)
        seed: random seed
    """
    rng = make_rng(seed, "connected-graph", n)
    edges = _prufer_tree(n, rng)
    present = {(min(u, v), max(u, v)) for u, v in edges}
    free = n * (n - 1) // 2 - len(present)
    target = min(n // 2 if extra_edges is None else extra_edges, free)
    while target > 0:
        u, v = (int(i) for i in rng.integers(0, n, size=2))
        pair = (min(u, v), max(u, v))
        if u == v or pair in present:
            continue
        present.add(pair)
        edges.append(pair)
        target -= 1
    return build_graph(np.array(edges, dtype=np.int64).reshape(-1, 2), n)


def path_graph(n: int) -> Graph:
    return build_graph([(i, i + 1) for i in range(n - 1)], n)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise IndexOutOfRange(f"a simple cycle needs at least 3 nodes, got {n}")
    return build_graph([(i, (i + 1) % n) for i in range(n)], n)


def complete_graph(n: int) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    return build_graph(np.column_stack([iu, ju]), n)


def disjoint_union(*graphs: Graph) -> Graph:
    """Place graphs side by side, relabelling nodes consecutively."""
    offset, edges = 0, []
    for g in graphs:
        edges.append(g.edge_list() + offset)
        offset += g.n_nodes
    return build_graph(np.concatenate(edges) if edges else np.empty((0, 2)), offset)
