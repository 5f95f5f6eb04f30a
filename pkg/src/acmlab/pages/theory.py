"""Contraction Checks page: run the contraction lab on small graphs interactively."""

import numpy as np
import streamlit as st

from acmlab.engine.graph import identity_operator, spmm
from acmlab.engine.optim import make_rng
from acmlab.errors import AcmLabError
from acmlab.experiments.theory import attention_fn, circle_points, row_norm_fn, sphere_mean_fn
from acmlab.lab.contraction import check_contracted, collapse_check, iterate
from acmlab.lab.metrics import EuclideanMetric, ManifoldMetric
from acmlab.utils.results import line_chart
from acmlab.utils.synthetic import complete_graph, cycle_graph, path_graph, random_connected_graph

GRAPHS = {
    "cycle": cycle_graph,
    "path": path_graph,
    "complete": complete_graph,
    "random connected": random_connected_graph,
}
AGGREGATIONS = ["row_norm", "identity (λ = 0)", "attention", "sphere mean (ACM)"]


def _aggregation(kind, g, lam, seed):
    if kind == "row_norm":
        return row_norm_fn(g, lam), EuclideanMetric()
    if kind == "attention":
        return attention_fn(g, 2, seed), EuclideanMetric()
    if kind == "sphere mean (ACM)":
        return sphere_mean_fn(g, 2, lam), ManifoldMetric.sphere(2)
    L = identity_operator(g)
    return (lambda H: spmm(L, H)), EuclideanMetric()


def render(ctx: dict):
    """Render the Contraction Checks page."""
    st.title("Contraction Checks")

    col1, col2, col3 = st.columns(3)
    with col1:
        graph_kind = st.selectbox("Graph", list(GRAPHS), key="theory_graph")
        n = st.number_input("Nodes", min_value=3, max_value=200, value=4, key="theory_n")
    with col2:
        agg_kind = st.selectbox("Aggregation", AGGREGATIONS, key="theory_agg")
        lam = st.slider("λ", min_value=0.05, max_value=1.0, value=1.0, step=0.05, key="theory_lam")
    with col3:
        samples = st.number_input("Samples", min_value=10, max_value=20_000, value=1000, step=10)
        seed = st.number_input("Seed", min_value=0, value=0, key="theory_seed")

    g = GRAPHS[graph_kind](int(n))
    agg_fn, metric = _aggregation(agg_kind, g, lam, int(seed))
    st.caption(f"{g.n_nodes} nodes, {g.n_edges} edges, connected: {g.is_connected()}")

    if st.button("Check contraction", type="primary", use_container_width=True):
        try:
            report = check_contracted(agg_fn, g, metric, int(samples), seed=int(seed))
        except AcmLabError as exc:
            st.error(str(exc))
        else:
            st.metric("Verdict", str(report.verdict))
            st.json(report.to_dict())

    st.divider()
    st.subheader("Trajectory")
    steps = st.slider("Steps", min_value=1, max_value=2000, value=200, key="theory_steps")
    if isinstance(metric, ManifoldMetric) and graph_kind == "cycle":
        H0 = circle_points(g.n_nodes)
        st.caption("Starting from evenly spaced points on the unit circle.")
    else:
        H0 = make_rng(int(seed), "ui").standard_normal((g.n_nodes, 2))
        if isinstance(metric, ManifoldMetric):
            H0 /= np.linalg.norm(H0, axis=1, keepdims=True)
    try:
        traj = iterate(agg_fn, H0, int(steps), metric)
    except AcmLabError as exc:
        st.error(str(exc))
        return
    st.altair_chart(line_chart(traj.stats, "step", "max_pairwise"), use_container_width=True)

    if agg_kind in ("row_norm", "sphere mean (ACM)") and g.is_connected():
        kind = "row_norm" if agg_kind == "row_norm" else "acm"
        outcome = collapse_check(g, kind, lam, H0, tol=1e-6, max_steps=int(steps))
        st.write(f"Collapse check (tol 1e-6, {steps} steps): **{outcome}**")
