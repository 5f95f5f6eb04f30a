"""Writers for run outputs (CSV, JSON, SVG charts) and the schema self-check."""

import json
import logging
import os

import altair as alt
import numpy as np
import pandas as pd

from acmlab.config.constants import CSV_SCHEMAS, REPORT_FILE, SUMMARY_FILE
from acmlab.errors import MissingFile, ShapeMismatch
from acmlab.utils.time_utils import iso_timestamp

logger = logging.getLogger(__name__)

JSON_REQUIRED_KEYS = {
    SUMMARY_FILE: ["created_at", "config", "aggregate"],
    REPORT_FILE: ["created_at", "checks"],
}
ACCURACY_COLUMNS = ("accuracy", "best_val_acc", "test_acc")


def _to_builtin(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_csv(df: pd.DataFrame, path: str) -> None:
    """Write a result table; files with a documented schema must match it exactly."""
    schema = CSV_SCHEMAS.get(os.path.basename(path))
    if schema is not None and list(df.columns) != schema:
        raise ShapeMismatch(f"{os.path.basename(path)} needs columns {schema}, got {list(df.columns)}")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")
    logger.debug("wrote %d rows to %s", len(df), path)


def write_json(data: dict, path: str, stamp: bool = True) -> dict:
    """Write a JSON document, adding a `created_at` UTC stamp."""
    doc = {"created_at": iso_timestamp(), **data} if stamp else dict(data)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, default=_to_builtin)
    logger.debug("wrote %s", path)
    return doc


def read_json(path: str) -> dict:
    if not os.path.exists(path):
        raise MissingFile(path)
    with open(path) as f:
        return json.load(f)


def line_chart(df: pd.DataFrame, x: str, y: str, color: str | None = None,
               title: str = "") -> alt.Chart:
    encoding = {
        "x": alt.X(f"{x}:Q", title=x),
        "y": alt.Y(f"{y}:Q", title=y),
        "tooltip": list(df.columns),
    }
    if color:
        encoding["color"] = alt.Color(f"{color}:N", title=color)
    return alt.Chart(df, title=title).mark_line(point=True).encode(**encoding)


def save_chart(chart: alt.Chart, path: str) -> bool:
    """Render a chart to SVG. CSV stays authoritative, so a missing renderer only warns."""
    try:
        chart.save(path)
    except (ValueError, ImportError, RuntimeError) as exc:
        logger.warning("could not render %s: %s", path, exc)
        return False
    return True


def _check_csv(path, schema):
    problems = []
    try:
        df = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        return [f"{path}: unreadable ({exc})"]
    if list(df.columns) != schema:
        problems.append(f"{path}: columns {list(df.columns)} != {schema}")
        return problems
    for col in ACCURACY_COLUMNS:
        if col in df.columns and not df[col].between(0.0, 1.0).all():
            problems.append(f"{path}: {col} outside [0, 1]")
    for col in ("max_pairwise", "mean_pairwise", "max_to_ref"):
        if col in df.columns and (df[col] < 0).any():
            problems.append(f"{path}: negative {col}")
    return problems


def _check_json(path, required):
    try:
        doc = read_json(path)
    except json.JSONDecodeError as exc:
        return [f"{path}: invalid JSON ({exc.msg})"]
    missing = [k for k in required if k not in doc]
    return [f"{path}: missing keys {missing}"] if missing else []


def validate_run_dir(run_dir: str) -> list[str]:
    """Check every known output file under `run_dir` against its schema.

    Returns:
        list of problems (empty when everything conforms)

    Raises:
        MissingFile: run_dir does not exist
    """
    if not os.path.isdir(run_dir):
        raise MissingFile(run_dir)
    problems, checked = [], 0
    for root, _, files in os.walk(run_dir):
        for name in sorted(files):
            path = os.path.join(root, name)
            if name in CSV_SCHEMAS:
                problems += _check_csv(path, CSV_SCHEMAS[name])
                checked += 1
            elif name in JSON_REQUIRED_KEYS:
                problems += _check_json(path, JSON_REQUIRED_KEYS[name])
                checked += 1
    if checked == 0:
        problems.append(f"{run_dir}: no result files found")
    logger.info("self-check of %s: %d files, %d problems", run_dir, checked, len(problems))
    return problems
