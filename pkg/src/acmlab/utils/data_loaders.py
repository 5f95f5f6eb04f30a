"""Dataset loading and writing for edges.tsv / features.csv / labels.csv / splits.json."""

import json
import logging
import os
import re
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from acmlab.config.constants import (
    EDGES_FILE,
    FEATURE_DIGITS,
    FEATURES_FILE,
    LABELS_FILE,
    SPLIT_NAMES,
    SPLITS_FILE,
)
from acmlab.engine.graph import Graph, build_graph
from acmlab.errors import (
    DataError,
    LabelOutOfRange,
    MissingFile,
    ParseError,
    ShapeMismatch,
    SplitOverlap,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        for name in SPLIT_NAMES:
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        seen = np.concatenate([self.train, self.val, self.test])
        uniq, counts = np.unique(seen, return_counts=True)
        if (counts > 1).any():
            raise SplitOverlap(uniq[counts > 1])

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in SPLIT_NAMES}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Graph, node features, labels and a disjoint train/val/test split."""

    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    split: Split
    n_classes: int = 0

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        n = self.graph.n_nodes
        if features.ndim != 2 or features.shape[0] != n:
            raise ShapeMismatch(f"features have shape {features.shape}, graph has {n} nodes")
        if labels.shape != (n,):
            raise ShapeMismatch(f"{labels.shape[0] if labels.ndim else 0} labels for {n} nodes")
        n_classes = self.n_classes or (int(labels.max()) + 1 if n else 0)
        if n and (labels.min() < 0 or labels.max() >= n_classes):
            raise LabelOutOfRange(f"labels must lie in [0, {n_classes})")
        for name in SPLIT_NAMES:
            idx = getattr(self.split, name)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ShapeMismatch(f"split '{name}' references nodes outside [0, {n})")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    def masks(self) -> dict:
        """Boolean node masks keyed by split name."""
        out = {}
        for name in SPLIT_NAMES:
            mask = np.zeros(self.n_nodes, dtype=bool)
            mask[getattr(self.split, name)] = True
            out[name] = mask
        return out


def _require(path):
    if not os.path.exists(path):
        raise MissingFile(path)


def _read_table(path, sep, dtype_name):
    """Read a headerless numeric table, reporting the first bad line."""
    try:
        df = pd.read_csv(path, sep=sep, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(path, int(match.group(1)) if match else 0, str(exc)) from None
    numeric = df.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().any(axis=1)
    if bad.any():
        raise ParseError(path, int(np.flatnonzero(bad.to_numpy())[0]) + 1, f"expected {dtype_name}")
    return numeric


def _read_features(path):
    try:
        df = pd.read_csv(path, header=None, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise ParseError(path, 1, "no feature rows") from None
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(path, int(match.group(1)) if match else 0, str(exc)) from None
    bad = df.apply(lambda col: pd.to_numeric(col, errors="coerce")).isna().any(axis=1)
    if bad.any():
        raise ParseError(path, int(np.flatnonzero(bad.to_numpy())[0]) + 1, "expected decimal floats")
    return df.to_numpy(dtype=np.float64)


def _read_splits(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    if not isinstance(data, dict) or set(SPLIT_NAMES) - set(data):
        raise ParseError(path, 1, "expected an object with keys train, val, test")
    try:
        return Split(**{name: [int(i) for i in data[name]] for name in SPLIT_NAMES})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise ParseError(path, 1, "split entries must be integer arrays") from None


def load_dataset(dir_path: str) -> Dataset:
    """Load and validate a dataset directory.

    Args:
        dir_path: directory with edges.tsv, features.csv, labels.csv, splits.json

    Returns:
        Dataset with n_nodes taken from the number of feature rows

    Raises:
        MissingFile, ParseError, ShapeMismatch, SplitOverlap, LabelOutOfRange
    """
    paths = {name: os.path.join(dir_path, name)
             for name in (EDGES_FILE, FEATURES_FILE, LABELS_FILE, SPLITS_FILE)}
    for path in paths.values():
        _require(path)

    features = _read_features(paths[FEATURES_FILE])
    labels_df = _read_table(paths[LABELS_FILE], ",", "one integer per line")
    if labels_df.shape[1] > 1:
        raise ParseError(paths[LABELS_FILE], 1, "expected one integer per line")
    labels = labels_df.to_numpy().ravel()
    if np.any(labels != np.round(labels)):
        line = int(np.flatnonzero(labels != np.round(labels))[0]) + 1
        raise ParseError(paths[LABELS_FILE], line, "labels must be integers")

    edges_df = _read_table(paths[EDGES_FILE], "\t", "two tab-separated integers")
    if edges_df.shape[1] not in (0, 2):
        raise ParseError(paths[EDGES_FILE], 1, "expected two tab-separated integers")
    edges = edges_df.to_numpy(dtype=np.int64).reshape(-1, 2)

    n = features.shape[0]
    if labels.shape[0] != n:
        raise ShapeMismatch(f"{labels.shape[0]} labels but {n} feature rows")
    graph = build_graph(edges, n)
    ds = Dataset(
        graph=graph,
        features=features,
        labels=labels.astype(np.int64),
        split=_read_splits(paths[SPLITS_FILE]),
    )
    logger.info(
        "loaded %s: %d nodes, %d edges, %d features, %d classes",
        dir_path, ds.n_nodes, graph.n_edges, features.shape[1], ds.n_classes,
    )
    return ds


def write_dataset(ds: Dataset, dir_path: str) -> None:
    """Write a dataset in the directory format read by load_dataset."""
    os.makedirs(dir_path, exist_ok=True)
    pd.DataFrame(ds.graph.edge_list()).to_csv(
        os.path.join(dir_path, EDGES_FILE), sep="\t", header=False, index=False,
        lineterminator="\n",
    )
    pd.DataFrame(ds.features).to_csv(
        os.path.join(dir_path, FEATURES_FILE), header=False, index=False,
        float_format=f"%.{FEATURE_DIGITS}g", lineterminator="\n",
    )
    pd.DataFrame(ds.labels).to_csv(
        os.path.join(dir_path, LABELS_FILE), header=False, index=False, lineterminator="\n",
    )
    with open(os.path.join(dir_path, SPLITS_FILE), "w") as f:
        json.dump(ds.split.to_dict(), f)
    logger.info("wrote dataset with %d nodes to %s", ds.n_nodes, dir_path)


def apply_missing_features(ds: Dataset) -> Dataset:
    """Zero the feature rows of every validation and test node."""
    features = ds.features.copy()
    features[ds.split.val] = 0.0
    features[ds.split.test] = 0.0
    return replace(ds, features=features)
