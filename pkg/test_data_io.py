"""Tests for dataset loading/writing, the SBM generator and the missing-feature transform."""

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from acmlab.errors import (
    DuplicateEdge,
    IndexOutOfRange,
    IndivisibleBlocks,
    InvalidProbability,
    LabelOutOfRange,
    MissingFile,
    ParseError,
    ShapeMismatch,
    SplitOverlap,
)
from acmlab.utils.data_loaders import Dataset, Split, apply_missing_features, load_dataset, write_dataset
from acmlab.utils.synthetic import (
    complete_graph,
    cycle_graph,
    disjoint_union,
    planted_modularity,
    random_connected_graph,
    synth_sbm,
)

TRIANGLE = Path(__file__).parent / "data" / "fixtures" / "triangle"


@pytest.fixture
def triangle_dir(tmp_path):
    target = tmp_path / "triangle"
    shutil.copytree(TRIANGLE, target)
    return target


def test_load_fixture():
    ds = load_dataset(str(TRIANGLE))
    assert ds.n_nodes == 3
    assert ds.graph.degrees.tolist() == [2, 2, 2]
    assert ds.features.shape == (3, 2)
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.n_classes == 2
    assert ds.split.to_dict() == {"train": [0], "val": [1], "test": [2]}
    masks = ds.masks()
    assert masks["val"].tolist() == [False, True, False]


def test_missing_file(triangle_dir):
    (triangle_dir / "labels.csv").unlink()
    with pytest.raises(MissingFile):
        load_dataset(str(triangle_dir))


def test_feature_rows_must_match_labels(triangle_dir):
    (triangle_dir / "features.csv").write_text("1.0,0.0\n0.0,1.0\n")
    with pytest.raises(ShapeMismatch):
        load_dataset(str(triangle_dir))


def test_split_overlap(triangle_dir):
    (triangle_dir / "splits.json").write_text(json.dumps({"train": [0, 1], "val": [], "test": [1, 2]}))
    with pytest.raises(SplitOverlap) as info:
        load_dataset(str(triangle_dir))
    assert info.value.nodes == [1]


@pytest.mark.parametrize(
    "name, content, line",
    [
        ("edges.tsv", "0\t1\n0\tx\n", 2),
        ("labels.csv", "0\n1\n0.5\n", 3),
        ("features.csv", "1.0,0.0\n0.0,abc\n1.0,0.0\n", 2),
        ("splits.json", '{"train": [0], "val": [1]}', 1),
    ],
)
def test_parse_errors_report_the_line(triangle_dir, name, content, line):
    (triangle_dir / name).write_text(content)
    with pytest.raises(ParseError) as info:
        load_dataset(str(triangle_dir))
    assert info.value.line == line


def test_edges_are_validated(triangle_dir):
    (triangle_dir / "edges.tsv").write_text("0\t1\n1\t0\n")
    with pytest.raises(DuplicateEdge):
        load_dataset(str(triangle_dir))
    (triangle_dir / "edges.tsv").write_text("0\t5\n")
    with pytest.raises(IndexOutOfRange):
        load_dataset(str(triangle_dir))


def test_split_outside_graph(triangle_dir):
    (triangle_dir / "splits.json").write_text(json.dumps({"train": [0], "val": [1], "test": [7]}))
    with pytest.raises(ShapeMismatch):
        load_dataset(str(triangle_dir))


def test_dataset_validates_labels():
    g = complete_graph(3)
    split = Split([0], [1], [2])
    with pytest.raises(LabelOutOfRange):
        Dataset(graph=g, features=np.ones((3, 2)), labels=[0, 1, 2], split=split, n_classes=2)
    with pytest.raises(ShapeMismatch):
        Dataset(graph=g, features=np.ones((3, 2)), labels=[0, 1], split=split)


def test_missing_features():
    ds = load_dataset(str(TRIANGLE))
    masked = apply_missing_features(ds)
    assert masked.features[1].tolist() == [0.0, 0.0]
    assert masked.features[2].tolist() == [0.0, 0.0]
    assert masked.features[0].tobytes() == ds.features[0].tobytes()
    assert np.array_equal(apply_missing_features(masked).features, masked.features)
    assert ds.features[2].tolist() == [1.0, 0.0]


def test_write_then_load_is_bit_exact(tmp_path):
    ds = synth_sbm(n=60, n_blocks=3, seed=4)
    write_dataset(ds, str(tmp_path))
    loaded = load_dataset(str(tmp_path))
    assert loaded.features.tobytes() == ds.features.tobytes()
    assert np.array_equal(loaded.labels, ds.labels)
    assert np.array_equal(loaded.graph.neighbors, ds.graph.neighbors)
    assert loaded.split.to_dict() == ds.split.to_dict()


def test_sbm_cliques():
    ds = synth_sbm(n=8, n_blocks=2, p_in=1.0, p_out=0.0, feat_dim=3, seed=0)
    edges = ds.graph.edge_list()
    assert len(edges) == 2 * 6
    assert (ds.labels[edges[:, 0]] == ds.labels[edges[:, 1]]).all()


def test_sbm_is_deterministic():
    a, b = synth_sbm(seed=11), synth_sbm(seed=11)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.graph.neighbors, b.graph.neighbors)
    assert a.split.to_dict() == b.split.to_dict()
    assert not np.array_equal(a.features, synth_sbm(seed=12).features)


def test_sbm_split_sizes():
    ds = synth_sbm(n=200, n_blocks=2, seed=0)
    assert len(ds.split.train) == 40
    assert len(ds.split.val) == 60
    assert len(ds.split.test) == 100
    for c in range(2):
        assert (ds.labels[ds.split.train] == c).sum() == 20


def _cross_block_edges(seed):
    ds = synth_sbm(n=200, n_blocks=2, p_in=0.1, p_out=0.01, seed=seed)
    edges = ds.graph.edge_list()
    return int((ds.labels[edges[:, 0]] != ds.labels[edges[:, 1]]).sum())


def test_sbm_cross_block_edge_count():
    # 100 x 100 cross pairs at p_out = 0.01: Binomial(10^4, 0.01) per seed.
    n_seeds = 200
    counts = np.array([_cross_block_edges(s) for s in range(n_seeds)])
    sigma = np.sqrt(10_000 * 0.01 * 0.99)
    assert abs(counts.mean() - 100) <= 3 * sigma / np.sqrt(n_seeds)
    assert abs(counts.std(ddof=1) - sigma) <= 0.2 * sigma


def test_sbm_argument_checks():
    with pytest.raises(InvalidProbability):
        synth_sbm(p_in=1.5)
    with pytest.raises(IndivisibleBlocks):
        synth_sbm(n=10, n_blocks=3)


def test_planted_partition_has_positive_modularity():
    positive = sum(
        planted_modularity(ds.graph, ds.labels) > 0
        for ds in (synth_sbm(n=100, p_in=0.1, p_out=0.02, seed=s) for s in range(40))
    )
    assert positive >= 38


def test_modularity_of_separate_cliques():
    g = disjoint_union(complete_graph(4), complete_graph(4))
    assert planted_modularity(g, [0] * 4 + [1] * 4) == pytest.approx(0.5)


def test_random_connected_graph():
    for seed in range(10):
        g = random_connected_graph(30, seed=seed)
        assert g.is_connected()
        assert g.n_edges == 29 + 15
    assert random_connected_graph(1).n_edges == 0


def test_cycle_needs_three_nodes():
    with pytest.raises(IndexOutOfRange):
        cycle_graph(2)
