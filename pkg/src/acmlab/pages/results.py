"""Run Results page: summaries, learning curves, sweeps and dispersion curves."""

import os

import pandas as pd
import streamlit as st

from acmlab.config.constants import (
    DISPERSION_FILE,
    METRICS_FILE,
    REPORT_FILE,
    SUMMARY_FILE,
    SWEEP_FILE,
)
from acmlab.errors import MissingFile
from acmlab.utils.helpers import format_accuracy
from acmlab.utils.results import line_chart, read_json, validate_run_dir


def list_runs(runs_dir: str) -> list[str]:
    """Run directories under runs_dir, newest first (names start with a UTC stamp)."""
    if not os.path.isdir(runs_dir):
        return []
    names = [n for n in os.listdir(runs_dir) if os.path.isdir(os.path.join(runs_dir, n))]
    return sorted(names, reverse=True)


def _metrics_files(run_dir: str) -> list[str]:
    found = []
    for root, _, files in os.walk(run_dir):
        if METRICS_FILE in files:
            found.append(os.path.join(root, METRICS_FILE))
    return sorted(found)


def _render_summary(run_dir):
    path = os.path.join(run_dir, SUMMARY_FILE)
    if not os.path.exists(path):
        return
    summary = read_json(path)
    st.caption(f"created {summary.get('created_at', '?')}")
    agg = summary.get("aggregate") or {}
    if "test_acc_mean" in agg:
        cols = st.columns(3)
        cols[0].metric("Test accuracy", format_accuracy(agg["test_acc_mean"], agg["test_acc_std"]))
        cols[1].metric("Val accuracy", format_accuracy(agg["val_acc_mean"], agg["val_acc_std"]))
        cols[2].metric("Repeats", agg["repeats"])
    if summary.get("dispersion"):
        with st.expander("Dispersion of the final embeddings"):
            st.json(summary["dispersion"])
    with st.expander("Configuration"):
        st.json(summary.get("config", {}))


def render(ctx: dict):
    """Render the Run Results page.

    Args:
        ctx: dict with runs_dir and run_dirs (from main.py)
    """
    st.title("Run Results")
    if not ctx["run_dirs"]:
        st.info(f"No runs found under `{ctx['runs_dir']}`. Start one with `acmlab train`.")
        return

    name = st.selectbox("Run", ctx["run_dirs"], key="results_run")
    run_dir = os.path.join(ctx["runs_dir"], name)

    problems = validate_run_dir(run_dir)
    if problems:
        st.warning("Self-check found problems:\n\n" + "\n".join(f"- {p}" for p in problems))

    _render_summary(run_dir)

    sweep_path = os.path.join(run_dir, SWEEP_FILE)
    if os.path.exists(sweep_path):
        st.subheader("Accuracy vs depth")
        sweep = pd.read_csv(sweep_path)
        by_depth = sweep.groupby("depth", as_index=False)["test_acc"].mean()
        st.altair_chart(line_chart(by_depth, "depth", "test_acc"), use_container_width=True)
        st.dataframe(sweep, hide_index=True, use_container_width=True)

    metrics_paths = _metrics_files(run_dir)
    if metrics_paths:
        st.subheader("Learning curves")
        labels = [os.path.relpath(p, run_dir) for p in metrics_paths]
        chosen = st.selectbox("Repeat", labels, key="results_repeat")
        metrics = pd.read_csv(os.path.join(run_dir, chosen))
        metric = st.radio("Metric", ["accuracy", "loss"], horizontal=True, key="results_metric")
        st.altair_chart(line_chart(metrics, "epoch", metric, color="split"), use_container_width=True)

    dispersion_path = os.path.join(run_dir, DISPERSION_FILE)
    if os.path.exists(dispersion_path):
        st.subheader("Dispersion per layer")
        profile = pd.read_csv(dispersion_path)
        st.altair_chart(line_chart(profile, "layer", "mean_pairwise"), use_container_width=True)

    report_path = os.path.join(run_dir, REPORT_FILE)
    if os.path.exists(report_path):
        st.subheader("Theory checks")
        try:
            report = read_json(report_path)
        except MissingFile:
            return
        checks = pd.DataFrame(report.get("checks", []))
        if not checks.empty:
            st.dataframe(checks[["name", "expected", "observed", "passed"]],
                         hide_index=True, use_container_width=True)
