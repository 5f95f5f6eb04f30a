"""Per-layer dispersion of node embeddings: how far over-smoothing has gone."""

import numpy as np
import pandas as pd

from acmlab.config.constants import CSV_SCHEMAS, DISPERSION_FILE, DISPERSION_SAMPLE_NODES
from acmlab.config.settings import Arch
from acmlab.engine.graph import degree_scaling
from acmlab.engine.optim import make_rng
from acmlab.lab.metrics import EuclideanMetric, ManifoldMetric


def sample_nodes(n: int, limit: int = DISPERSION_SAMPLE_NODES, seed: int = 0) -> np.ndarray:
    if n <= limit:
        return np.arange(n)
    return np.sort(make_rng(seed, "dispersion").choice(n, size=limit, replace=False))


def dispersion_profile(model, X, max_nodes: int = DISPERSION_SAMPLE_NODES) -> pd.DataFrame:
    """Mean and max pairwise distance of the embedding after each aggregation.

    ACM embeddings are measured with the geodesic distance of the manifold they
    lie on. Vanilla embeddings use Euclidean distance; for the symmetric
    operator (SGC and GCN) rows are first rescaled by D̃^{-1/2}, the
    coordinates in which that operator collapses every row to one point.

    Returns:
        DataFrame with columns layer, mean_pairwise, max_pairwise (layer 0 is the input)
    """
    result = model.embed(X)
    nodes = sample_nodes(model.graph.n_nodes, max_nodes)
    rescale = None
    if not model.cfg.is_acm and model.cfg.arch != Arch.GAT:
        rescale = degree_scaling(model.graph, -0.5)[:, None]

    rows = []
    for layer, (H, m) in enumerate(zip(result.embeddings, result.manifolds)):
        if m is None:
            metric = EuclideanMetric()
            H = H if rescale is None else H * rescale
        else:
            metric = ManifoldMetric(m)
        pairs = metric.pair_values(H[nodes])
        rows.append((
            layer,
            float(pairs.mean()) if pairs.size else 0.0,
            float(pairs.max(initial=0.0)),
        ))
    return pd.DataFrame(rows, columns=CSV_SCHEMAS[DISPERSION_FILE])


def summarize_dispersion(profile: pd.DataFrame) -> dict:
    """Final-layer statistics plus their ratio to the first aggregation."""
    final = profile.iloc[-1]
    first = profile.iloc[1] if len(profile) > 1 else profile.iloc[0]
    ratio = float(final.mean_pairwise / first.mean_pairwise) if first.mean_pairwise > 0 else 0.0
    return {
        "final_layer": int(final.layer),
        "final_mean_pairwise": float(final.mean_pairwise),
        "final_max_pairwise": float(final.max_pairwise),
        "input_mean_pairwise": float(profile.iloc[0].mean_pairwise),
        "final_to_first_ratio": ratio,
    }
