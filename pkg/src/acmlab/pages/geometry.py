"""Manifold Geometry page: P_U, PF and PB on a two-dimensional ellipse."""

import math

import altair as alt
import numpy as np
import pandas as pd
import streamlit as st

from acmlab.engine.manifold import ManifoldSpec, manifold_distance, project_pu, push_back, push_forward
from acmlab.errors import AcmLabError


def _ellipse(m: ManifoldSpec, n=200) -> pd.DataFrame:
    t = np.linspace(0.0, 2.0 * math.pi, n)
    pts = np.column_stack([np.cos(t), np.sin(t)]) / np.sqrt(m.u_diag)
    return pd.DataFrame({"x": pts[:, 0], "y": pts[:, 1], "order": np.arange(n)})


def render(ctx: dict):
    """Render the Manifold Geometry page."""
    st.title("Manifold Geometry")
    st.caption("M_U = {x : x U xᵀ = 1} for U = diag(u1, u2), with PF projecting from x0 = (u1^-1/2, 0) onto x1 = b.")

    col1, col2 = st.columns(2)
    with col1:
        u1 = st.slider("u1", min_value=0.1, max_value=4.0, value=1.0, step=0.05)
        u2 = st.slider("u2", min_value=0.1, max_value=4.0, value=1.0, step=0.05)
        b = st.slider("b (hyperplane offset)", min_value=-2.0, max_value=2.0, value=0.0, step=0.05)
    with col2:
        wx = st.number_input("w1", value=-0.8, step=0.1)
        wy = st.number_input("w2", value=0.9, step=0.1)

    try:
        m = ManifoldSpec(u_diag=np.array([u1, u2]), b=b)
        w = np.array([wx, wy])
        on = project_pu(w, m)
        chart_pt = push_forward(on, m)
        back = push_back(chart_pt, m)
    except AcmLabError as exc:
        st.error(str(exc))
        return

    points = pd.DataFrame(
        [
            ("w", *w),
            ("P_U(w)", *on),
            ("PF(P_U(w))", *chart_pt),
            ("x0", *m.x0),
        ],
        columns=["point", "x", "y"],
    )
    ellipse = alt.Chart(_ellipse(m)).mark_line().encode(x="x:Q", y="y:Q", order="order:Q")
    ray = alt.Chart(points[points["point"].isin(["x0", "PF(P_U(w))"])]).mark_line(
        strokeDash=[4, 4]
    ).encode(x="x:Q", y="y:Q")
    dots = alt.Chart(points).mark_point(filled=True, size=80).encode(
        x="x:Q", y="y:Q", color="point:N", tooltip=["point", "x", "y"]
    )
    hyperplane = alt.Chart(pd.DataFrame({"x": [b]})).mark_rule(color="gray").encode(x="x:Q")
    st.altair_chart((ellipse + hyperplane + ray + dots).properties(height=450), use_container_width=True)

    st.dataframe(points, hide_index=True, use_container_width=True)
    c1, c2 = st.columns(2)
    c1.metric("|PB(PF(P_U(w))) - P_U(w)|", f"{np.linalg.norm(back - on):.2e}")
    c2.metric("distance to -P_U(w)", f"{manifold_distance(on, -on, m):.4f}")
