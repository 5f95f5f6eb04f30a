"""Numerical core: graphs, manifold geometry, the autodiff tape and the optimizer."""

from .graph import (
    Graph,
    build_graph,
    AggregatorKind,
    AggregatorMatrix,
    make_aggregator,
    identity_operator,
    attention_operator,
    degree_scaling,
    spmm,
)
from .manifold import (
    ManifoldSpec,
    project_pu,
    project_rows_pu,
    push_forward,
    push_back,
    manifold_distance,
    pairwise_distances,
    on_manifold,
)
from .autodiff import Node, OpKind, Tape
from .optim import AdamState, adam_step, glorot_init, make_rng
from .gradcheck import GradCheckResult, check_gradients

__all__ = [
    # graph
    "Graph",
    "build_graph",
    "AggregatorKind",
    "AggregatorMatrix",
    "make_aggregator",
    "identity_operator",
    "attention_operator",
    "degree_scaling",
    "spmm",
    # manifold
    "ManifoldSpec",
    "project_pu",
    "project_rows_pu",
    "push_forward",
    "push_back",
    "manifold_distance",
    "pairwise_distances",
    "on_manifold",
    # autodiff
    "Node",
    "OpKind",
    "Tape",
    # optim
    "AdamState",
    "adam_step",
    "glorot_init",
    "make_rng",
    # gradcheck
    "GradCheckResult",
    "check_gradients",
]
