"""GNN architectures."""

from .gnn import (
    GNNModel,
    ForwardResult,
    gcn_acm_layer,
    gat_attention,
    classify,
    sgc_forward,
)

__all__ = [
    "GNNModel",
    "ForwardResult",
    "gcn_acm_layer",
    "gat_attention",
    "classify",
    "sgc_forward",
]
