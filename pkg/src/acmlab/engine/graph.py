"""Graphs in CSR form and the aggregation operators built on them.

Input graphs are undirected and store no self-loops. Every operator works on
the augmented adjacency Ã = A + I with augmented degrees D̃ = D + I.
"""

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from acmlab.errors import (
    AttentionNotStatic,
    DuplicateEdge,
    IndexOutOfRange,
    LambdaOutOfRange,
    SelfLoopInInput,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)


def _frozen(arr, dtype):
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph in compressed-sparse-row form.

    `neighbors[row_offsets[i]:row_offsets[i + 1]]` lists the neighbors of
    node i in ascending order; every edge is stored in both rows.
    """

    n_nodes: int
    row_offsets: np.ndarray
    neighbors: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    @property
    def n_edges(self) -> int:
        return len(self.neighbors) // 2

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.neighbors[self.row_offsets[i]:self.row_offsets[i + 1]]

    def closed_neighborhood(self, i: int) -> np.ndarray:
        """Ñ(u_i): the neighbors of i plus i itself, ascending."""
        return np.sort(np.append(self.neighbors_of(i), i))

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.neighbors))
        return sp.csr_matrix(
            (data, self.neighbors.copy(), self.row_offsets.copy()),
            shape=(self.n_nodes, self.n_nodes),
        )

    def augmented_adjacency(self) -> sp.csr_matrix:
        """Ã = A + I with sorted column indices."""
        a_tilde = (self.adjacency() + sp.identity(self.n_nodes, format="csr")).tocsr()
        a_tilde.sort_indices()
        return a_tilde

    def augmented_degrees(self) -> np.ndarray:
        """Diagonal of D̃ = D + I."""
        return self.degrees.astype(np.float64) + 1.0

    def augmented_pattern(self) -> tuple[np.ndarray, np.ndarray]:
        """(rows, cols) of every stored entry of Ã, in CSR order."""
        a_tilde = self.augmented_adjacency()
        rows = np.repeat(np.arange(self.n_nodes), np.diff(a_tilde.indptr))
        return rows, a_tilde.indices.copy()

    def edge_list(self) -> np.ndarray:
        """Each undirected edge once, as (u, v) with u < v."""
        rows = np.repeat(np.arange(self.n_nodes), self.degrees)
        keep = rows < self.neighbors
        return np.stack([rows[keep], self.neighbors[keep]], axis=1)

    def connected_components(self) -> tuple[int, np.ndarray]:
        return connected_components(self.adjacency(), directed=False)

    def is_connected(self) -> bool:
        return self.n_nodes <= 1 or self.connected_components()[0] == 1

    def permute(self, perm) -> "Graph":
        """Relabel node i as perm[i]."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n_nodes)):
            raise IndexOutOfRange("perm must be a permutation of 0..n_nodes-1")
        edges = self.edge_list()
        return build_graph(perm[edges], self.n_nodes)


def build_graph(edge_list, n_nodes: int) -> Graph:
    """Build a symmetric CSR graph from undirected edges.

    Args:
        edge_list: array-like of (u, v) pairs, each undirected edge once
        n_nodes: number of nodes

    Returns:
        Graph with each edge stored in both rows and sorted neighbor lists

    Raises:
        IndexOutOfRange: an endpoint is negative or >= n_nodes
        SelfLoopInInput: an edge (u, u) is present
        DuplicateEdge: an edge is listed twice, in either orientation
    """
    if n_nodes < 0:
        raise IndexOutOfRange(f"n_nodes must be >= 0, got {n_nodes}")
    edges = np.asarray(edge_list, dtype=np.int64).reshape(-1, 2)

    if len(edges):
        bad = (edges < 0) | (edges >= n_nodes)
        if bad.any():
            u, v = edges[bad.any(axis=1)][0]
            raise IndexOutOfRange(f"edge ({u}, {v}) has an endpoint outside [0, {n_nodes})")
        loops = edges[:, 0] == edges[:, 1]
        if loops.any():
            raise SelfLoopInInput(int(edges[loops][0, 0]))
        canon = np.sort(edges, axis=1)
        uniq, counts = np.unique(canon, axis=0, return_counts=True)
        if (counts > 1).any():
            u, v = uniq[counts > 1][0]
            raise DuplicateEdge(int(u), int(v))

    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n_nodes, n_nodes)
    )
    adj.sort_indices()
    graph = Graph(
        n_nodes=int(n_nodes),
        row_offsets=_frozen(adj.indptr, np.int64),
        neighbors=_frozen(adj.indices, np.int64),
    )
    logger.debug("built graph with %d nodes and %d edges", graph.n_nodes, graph.n_edges)
    return graph


class AggregatorKind(StrEnum):
    ROW_NORM = "row_norm"
    SYM_NORM = "sym_norm"
    ATTENTION = "attention"


@dataclass(frozen=True, eq=False)
class AggregatorMatrix:
    """Sparse linear operator L acting on node embeddings (L·H).

    `matrix` shares the sparsity pattern of Ã; structural zeros outside Ñ(u_i)
    are never stored. `lam` is NaN for attention operators.
    """

    kind: AggregatorKind
    lam: float
    matrix: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _freeze_matrix(mat: sp.csr_matrix) -> sp.csr_matrix:
    mat = mat.tocsr()
    mat.sort_indices()
    for arr in (mat.data, mat.indices, mat.indptr):
        arr.setflags(write=False)
    return mat


def degree_scaling(g: Graph, power: float) -> np.ndarray:
    """Diagonal of D̃^power as a vector."""
    return np.power(g.augmented_degrees(), power)


def make_aggregator(g: Graph, kind=AggregatorKind.ROW_NORM, lam: float = 1.0) -> AggregatorMatrix:
    """Build one of the Laplace-smoothing operators.

    row_norm: L = (1 - λ)I + λ D̃^{-1} Ã
    sym_norm: L = (1 - λ)I + λ D̃^{-1/2} Ã D̃^{-1/2}

    Raises:
        AttentionNotStatic: kind is attention (built per forward pass in the models)
        LambdaOutOfRange: λ outside (0, 1]
    """
    kind = AggregatorKind(kind)
    if kind == AggregatorKind.ATTENTION:
        raise AttentionNotStatic()
    if not (0.0 < lam <= 1.0):
        raise LambdaOutOfRange(lam)

    a_tilde = g.augmented_adjacency()
    deg = g.augmented_degrees()
    rows = np.repeat(np.arange(g.n_nodes), np.diff(a_tilde.indptr))
    cols = a_tilde.indices
    if kind == AggregatorKind.ROW_NORM:
        values = lam / deg[rows]
    else:
        values = lam / np.sqrt(deg[rows] * deg[cols])
    values = values + np.where(rows == cols, 1.0 - lam, 0.0)

    mat = sp.csr_matrix((values, cols.copy(), a_tilde.indptr.copy()), shape=a_tilde.shape)
    return AggregatorMatrix(kind=kind, lam=float(lam), matrix=_freeze_matrix(mat))


def identity_operator(g: Graph) -> AggregatorMatrix:
    """The λ = 0 row operator L = I.

    make_aggregator rejects λ = 0; this exists for the refutation checks that
    show why contraction needs λ > 0.
    """
    mat = sp.identity(g.n_nodes, format="csr", dtype=np.float64)
    return AggregatorMatrix(kind=AggregatorKind.ROW_NORM, lam=0.0, matrix=_freeze_matrix(mat))


def attention_operator(g: Graph, values, tol: float = 1e-12) -> AggregatorMatrix:
    """Wrap per-entry attention weights (aligned with Ã's CSR order) as an operator.

    Raises:
        ShapeMismatch: wrong number of values, rows not summing to one,
            or non-positive entries
    """
    a_tilde = g.augmented_adjacency()
    values = np.asarray(values, dtype=np.float64).ravel()
    if len(values) != a_tilde.nnz:
        raise ShapeMismatch(f"expected {a_tilde.nnz} attention values, got {len(values)}")
    if (values <= 0).any():
        raise ShapeMismatch("attention values must be strictly positive")
    mat = sp.csr_matrix((values, a_tilde.indices.copy(), a_tilde.indptr.copy()), shape=a_tilde.shape)
    sums = np.asarray(mat.sum(axis=1)).ravel()
    if np.abs(sums - 1.0).max(initial=0.0) > tol:
        raise ShapeMismatch("attention rows must sum to 1")
    return AggregatorMatrix(kind=AggregatorKind.ATTENTION, lam=float("nan"), matrix=_freeze_matrix(mat))


def spmm(L: AggregatorMatrix, H) -> np.ndarray:
    """Dense result of L·H.

    Raises:
        ShapeMismatch: H row count differs from the operator size
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim == 1:
        H = H[:, None]
    if H.shape[0] != L.n_nodes:
        raise ShapeMismatch(f"H has {H.shape[0]} rows, operator expects {L.n_nodes}")
    return np.asarray(L.matrix @ H)
