"""Reverse-mode differentiation over dense float64 matrices.

A Tape records nodes eagerly: every `forward` call computes the value
immediately and appends a Node holding the closure that maps the node's
gradient to its parents' gradients. The tape is rebuilt for each forward pass,
so data-dependent graphs (attention) need no special handling.

Only the operations the models use are supported; there is no broadcasting.
"""

import logging
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, logsumexp

from acmlab.config.constants import CENTER_GUARD, EPS_NORM
from acmlab.errors import (
    AtProjectionCenter,
    NearZeroVector,
    NonScalarLoss,
    ShapeMismatch,
    UnknownOp,
)

logger = logging.getLogger(__name__)


class OpKind(StrEnum):
    CONSTANT = "constant"
    PARAMETER = "parameter"
    SPMM_CONST = "spmm_const"
    SPMM_VALUES = "spmm_values"
    MATMUL = "matmul"
    ADD = "add"
    MUL = "mul"
    SCALE = "scale"
    SUM = "sum"
    TANH = "tanh"
    LEAKY_RELU = "leaky_relu"
    SOFTPLUS = "softplus"
    ROW_PROJECT_PU = "row_project_pu"
    ROW_PUSH_FORWARD = "row_push_forward"
    ROW_PUSH_BACK = "row_push_back"
    DROPOUT = "dropout"
    LOG_SOFTMAX_ROWS = "log_softmax_rows"
    MASKED_NLL = "masked_nll"
    ATTENTION_WEIGHTS = "attention_weights"


@dataclass(eq=False)
class Node:
    id: int
    value: np.ndarray
    op_kind: OpKind
    parent_ids: tuple
    name: Optional[str] = None
    grad: Optional[np.ndarray] = None
    backward_fn: Optional[Callable] = field(default=None, repr=False)

    @property
    def shape(self) -> tuple:
        return self.value.shape


_OPS = {}


def _op(kind):
    def register(fn):
        _OPS[kind] = fn
        return fn
    return register


def _same_shape(a, b, what):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{what}: shapes {a.shape} and {b.shape} differ")


# --- elementwise and linear ops ----------------------------------------------

@_op(OpKind.MATMUL)
def _matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    return a @ b, lambda g: (g @ b.T, a.T @ g)


@_op(OpKind.ADD)
def _add(a, b):
    _same_shape(a, b, "add")
    return a + b, lambda g: (g, g)


@_op(OpKind.MUL)
def _mul(a, b):
    _same_shape(a, b, "mul")
    return a * b, lambda g: (g * b, g * a)


@_op(OpKind.SCALE)
def _scale(a, k=1.0):
    return k * a, lambda g: (k * g,)


@_op(OpKind.SUM)
def _sum(a):
    return np.array([[a.sum()]]), lambda g: (np.full_like(a, g[0, 0]),)


@_op(OpKind.TANH)
def _tanh(a):
    y = np.tanh(a)
    return y, lambda g: (g * (1.0 - y * y),)


@_op(OpKind.LEAKY_RELU)
def _leaky_relu(a, alpha=0.2):
    slope = np.where(a > 0, 1.0, alpha)
    return a * slope, lambda g: (g * slope,)


@_op(OpKind.SOFTPLUS)
def _softplus(a, floor=0.0):
    return np.logaddexp(0.0, a) + floor, lambda g: (g * expit(a),)


@_op(OpKind.DROPOUT)
def _dropout(a, p=0.0, seed=0, train=False):
    if not train or p == 0.0:
        return a.copy(), lambda g: (g,)
    keep = np.random.default_rng(seed).random(a.shape) >= p
    scale = keep / (1.0 - p)
    return a * scale, lambda g: (g * scale,)


# --- sparse aggregation --------------------------------------------------------

@_op(OpKind.SPMM_CONST)
def _spmm_const(h, matrix=None):
    if matrix.shape[1] != h.shape[0]:
        raise ShapeMismatch(f"spmm: operator {matrix.shape} vs H {h.shape}")
    return np.asarray(matrix @ h), lambda g: (np.asarray(matrix.T @ g),)


@_op(OpKind.SPMM_VALUES)
def _spmm_values(vals, h, indptr=None, cols=None, rows=None):
    n = len(indptr) - 1
    if vals.shape != (len(cols), 1) or h.shape[0] != n:
        raise ShapeMismatch(f"spmm_values: values {vals.shape}, H {h.shape}, nnz {len(cols)}")
    mat = sp.csr_matrix((vals[:, 0], cols, indptr), shape=(n, n))

    def backward(g):
        g_vals = np.einsum("ij,ij->i", g[rows], h[cols])[:, None]
        return g_vals, np.asarray(mat.T @ g)

    return np.asarray(mat @ h), backward


@_op(OpKind.ATTENTION_WEIGHTS)
def _attention_weights(src, dst, indptr=None, cols=None, rows=None, alpha=0.2):
    # e_ij = leaky_relu(src_i + dst_j), softmax over each row's stored entries.
    n = len(indptr) - 1
    if src.shape != (n, 1) or dst.shape != (n, 1):
        raise ShapeMismatch(f"attention_weights: scores {src.shape}/{dst.shape}, n={n}")
    e = src[rows, 0] + dst[cols, 0]
    slope = np.where(e > 0, 1.0, alpha)
    z = e * slope
    z_max = np.maximum.reduceat(z, indptr[:-1])
    ez = np.exp(z - z_max[rows])
    weights = ez / np.bincount(rows, weights=ez, minlength=n)[rows]

    def backward(g):
        g = g[:, 0]
        row_dot = np.bincount(rows, weights=weights * g, minlength=n)
        g_e = weights * (g - row_dot[rows]) * slope
        g_src = np.bincount(rows, weights=g_e, minlength=n)[:, None]
        g_dst = np.bincount(cols, weights=g_e, minlength=n)[:, None]
        return g_src, g_dst

    return weights[:, None], backward


# --- manifold maps with a (1, d) diagonal-U parent ------------------------------

def _check_u(h, u, what):
    if u.shape != (1, h.shape[1]):
        raise ShapeMismatch(f"{what}: u has shape {u.shape}, expected (1, {h.shape[1]})")


def _a0_to_u1(grad_a0, u1):
    # a0 = u1^{-1/2}
    return grad_a0 * (-0.5) * u1 ** -1.5


@_op(OpKind.ROW_PROJECT_PU)
def _row_project_pu(h, u, eps_norm=EPS_NORM, fallback=False):
    _check_u(h, u, "row_project_pu")
    uvec = u[0]
    q = (h * h) @ uvec
    bad = q < eps_norm ** 2
    if bad.any() and not fallback:
        raise NearZeroVector(np.flatnonzero(bad))
    ok = ~bad
    s = np.sqrt(np.where(ok, q, 1.0))
    a0 = uvec[0] ** -0.5
    y = h / s[:, None]
    y[bad] = 0.0
    y[bad, 0] = a0

    def backward(g):
        g_h = g / s[:, None]
        g_s = -np.einsum("ij,ij->i", g, h) / (s * s)
        g_q = np.where(ok, g_s / (2.0 * s), 0.0)
        g_h = g_h + 2.0 * g_q[:, None] * h * uvec
        g_h[bad] = 0.0
        g_u = (g_q[:, None] * h * h).sum(axis=0)
        g_u[0] += _a0_to_u1(g[bad, 0].sum(), uvec[0])
        return g_h, g_u[None, :]

    return y, backward


@_op(OpKind.ROW_PUSH_FORWARD)
def _row_push_forward(w, u, b=0.0, clamp=False):
    _check_u(w, u, "row_push_forward")
    uvec = u[0]
    a0 = uvec[0] ** -0.5
    t = w[:, 0] - a0
    clamped = np.abs(t) < CENTER_GUARD
    if clamped.any():
        if not clamp:
            raise AtProjectionCenter(np.flatnonzero(clamped))
        logger.debug("row_push_forward: clamped %d rows near x0", int(clamped.sum()))
        # Points of M_U have w1 <= a0, so the clamp pushes to the side they live on.
        t = np.where(clamped, np.where(t > 0, CENTER_GUARD, -CENTER_GUARD), t)
    c = (b - a0) / t
    diff = w.copy()
    diff[:, 0] -= a0
    y = c[:, None] * diff
    y[:, 0] += a0

    def backward(g):
        big_g = np.einsum("ij,ij->i", g, diff)
        g_w = c[:, None] * g
        g_a0 = g[:, 0].sum() - (c[:, None] * g)[:, 0].sum()
        g_a0 += (-big_g / t).sum()
        g_t = np.where(clamped, 0.0, -big_g * c / t)
        g_w[:, 0] += g_t
        g_a0 -= g_t.sum()
        g_u = np.zeros_like(uvec)
        g_u[0] = _a0_to_u1(g_a0, uvec[0])
        return g_w, g_u[None, :]

    return y, backward


@_op(OpKind.ROW_PUSH_BACK)
def _row_push_back(v, u, eps_norm=EPS_NORM, clamp=False):
    _check_u(v, u, "row_push_back")
    uvec = u[0]
    a0 = uvec[0] ** -0.5
    diff = v.copy()
    diff[:, 0] -= a0
    den = (diff * diff) @ uvec
    bad = den < eps_norm ** 2
    if bad.any():
        if not clamp:
            raise AtProjectionCenter(np.flatnonzero(bad))
        logger.debug("row_push_back: clamped %d rows near x0", int(bad.sum()))
        den = np.maximum(den, eps_norm ** 2)
    root_u1 = np.sqrt(uvec[0])  # u1 * a0
    num = -2.0 * root_u1 * diff[:, 0]
    t = num / den
    y = t[:, None] * diff
    y[:, 0] += a0

    def backward(g):
        big_g = np.einsum("ij,ij->i", g, diff)
        g_diff = t[:, None] * g
        g_num = big_g / den
        g_den = np.where(bad, 0.0, -big_g * num / (den * den))
        g_u = (g_den[:, None] * diff * diff).sum(axis=0)
        g_diff = g_diff + 2.0 * g_den[:, None] * diff * uvec
        g_diff[:, 0] += g_num * (-2.0 * root_u1)
        g_u[0] += (g_num * (-diff[:, 0] / root_u1)).sum()
        g_a0 = g[:, 0].sum() - g_diff[:, 0].sum()
        g_u[0] += _a0_to_u1(g_a0, uvec[0])
        return g_diff, g_u[None, :]

    return y, backward


# --- classification head -------------------------------------------------------

@_op(OpKind.LOG_SOFTMAX_ROWS)
def _log_softmax_rows(a):
    y = a - logsumexp(a, axis=1, keepdims=True)
    return y, lambda g: (g - np.exp(y) * g.sum(axis=1, keepdims=True),)


@_op(OpKind.MASKED_NLL)
def _masked_nll(logp, labels=None, mask=None):
    labels = np.asarray(labels, dtype=np.int64)
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if labels.shape != (logp.shape[0],):
        raise ShapeMismatch(f"masked_nll: {labels.shape[0]} labels for {logp.shape[0]} rows")
    if idx.size == 0:
        raise ShapeMismatch("masked_nll: empty mask")
    picked = logp[idx, labels[idx]]

    def backward(g):
        g_logp = np.zeros_like(logp)
        g_logp[idx, labels[idx]] = -g[0, 0] / idx.size
        return (g_logp,)

    return np.array([[-picked.mean()]]), backward


class Tape:
    """Append-only record of one forward pass."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.parameters: dict[str, int] = {}

    @property
    def parameter_ids(self) -> set:
        return set(self.parameters.values())

    def _append(self, value, op_kind, parent_ids=(), name=None, backward_fn=None):
        node = Node(
            id=len(self.nodes),
            value=value,
            op_kind=op_kind,
            parent_ids=tuple(parent_ids),
            name=name,
            backward_fn=backward_fn,
        )
        self.nodes.append(node)
        return node

    def forward(self, op_kind, *parents, **attrs) -> Node:
        """Evaluate `op_kind` on parent nodes and record the result.

        Raises:
            UnknownOp: op_kind is not supported
            ShapeMismatch: parent shapes do not fit the op
        """
        try:
            kind = OpKind(op_kind)
        except ValueError:
            raise UnknownOp(op_kind) from None
        if kind == OpKind.CONSTANT:
            return self.constant(attrs["value"])
        if kind == OpKind.PARAMETER:
            return self.parameter(attrs["name"], attrs["value"])
        for p in parents:
            if not isinstance(p, Node) or p.id >= len(self.nodes) or self.nodes[p.id] is not p:
                raise ShapeMismatch(f"{kind}: parent does not belong to this tape")
        value, backward_fn = _OPS[kind](*(p.value for p in parents), **attrs)
        return self._append(value, kind, [p.id for p in parents], backward_fn=backward_fn)

    # --- leaves ---

    def constant(self, value) -> Node:
        arr = np.array(value, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            arr = np.atleast_2d(arr)
        return self._append(arr, OpKind.CONSTANT)

    def parameter(self, name: str, value) -> Node:
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch(f"parameter {name!r} must be 2-D, got shape {arr.shape}")
        node = self._append(arr, OpKind.PARAMETER, name=name)
        self.parameters[name] = node.id
        return node

    # --- shorthands ---

    def matmul(self, a, b):
        return self.forward(OpKind.MATMUL, a, b)

    def add(self, a, b):
        return self.forward(OpKind.ADD, a, b)

    def mul(self, a, b):
        return self.forward(OpKind.MUL, a, b)

    def scale(self, a, k):
        return self.forward(OpKind.SCALE, a, k=k)

    def sum(self, a):
        return self.forward(OpKind.SUM, a)

    def tanh(self, a):
        return self.forward(OpKind.TANH, a)

    def leaky_relu(self, a, alpha=0.2):
        return self.forward(OpKind.LEAKY_RELU, a, alpha=alpha)

    def relu(self, a):
        return self.forward(OpKind.LEAKY_RELU, a, alpha=0.0)

    def softplus(self, a, floor=0.0):
        return self.forward(OpKind.SOFTPLUS, a, floor=floor)

    def dropout(self, a, p, seed, train):
        return self.forward(OpKind.DROPOUT, a, p=p, seed=seed, train=train)

    def spmm_const(self, matrix, h):
        return self.forward(OpKind.SPMM_CONST, h, matrix=matrix)

    def spmm_values(self, vals, h, indptr, cols, rows):
        return self.forward(OpKind.SPMM_VALUES, vals, h, indptr=indptr, cols=cols, rows=rows)

    def attention_weights(self, src, dst, indptr, cols, rows, alpha=0.2):
        return self.forward(
            OpKind.ATTENTION_WEIGHTS, src, dst, indptr=indptr, cols=cols, rows=rows, alpha=alpha
        )

    def row_project_pu(self, h, u, eps_norm=EPS_NORM, fallback=False):
        return self.forward(OpKind.ROW_PROJECT_PU, h, u, eps_norm=eps_norm, fallback=fallback)

    def row_push_forward(self, w, u, b=0.0, clamp=False):
        return self.forward(OpKind.ROW_PUSH_FORWARD, w, u, b=b, clamp=clamp)

    def row_push_back(self, v, u, eps_norm=EPS_NORM, clamp=False):
        return self.forward(OpKind.ROW_PUSH_BACK, v, u, eps_norm=eps_norm, clamp=clamp)

    def log_softmax_rows(self, a):
        return self.forward(OpKind.LOG_SOFTMAX_ROWS, a)

    def masked_nll(self, logp, labels, mask):
        return self.forward(OpKind.MASKED_NLL, logp, labels=labels, mask=mask)

    # --- reverse sweep ---

    def backward(self, loss: Node) -> dict[str, np.ndarray]:
        """Propagate d(loss)/d(node) to every node on the tape.

        Gradients of nodes used by several children are summed.

        Returns:
            dict mapping parameter name to its gradient (zeros if unused)

        Raises:
            NonScalarLoss: loss is not 1x1
        """
        if loss.value.shape != (1, 1):
            raise NonScalarLoss(loss.value.shape)
        for node in self.nodes:
            node.grad = None
        loss.grad = np.ones((1, 1))
        for node in reversed(self.nodes[: loss.id + 1]):
            if node.grad is None or node.backward_fn is None:
                continue
            for pid, g in zip(node.parent_ids, node.backward_fn(node.grad)):
                if g is None:
                    continue
                parent = self.nodes[pid]
                parent.grad = np.array(g, dtype=np.float64) if parent.grad is None else parent.grad + g
        return {
            name: (self.nodes[nid].grad if self.nodes[nid].grad is not None
                   else np.zeros_like(self.nodes[nid].value))
            for name, nid in self.parameters.items()
        }
