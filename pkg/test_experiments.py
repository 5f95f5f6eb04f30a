"""Tests for configuration loading, training, depth sweeps and dispersion diagnostics."""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from acmlab.config.settings import (
    DatasetSpec,
    ModelConfig,
    RunConfig,
    SynthSpec,
    TrainConfig,
    config_from_dict,
    load_config,
)
from acmlab.engine.manifold import ManifoldSpec, project_pu
from acmlab.errors import ConfigError, NonFiniteLoss
from acmlab.experiments.diagnose import diagnose
from acmlab.experiments.dispersion import dispersion_profile, sample_nodes, summarize_dispersion
from acmlab.experiments.sweep import sweep_layers
from acmlab.experiments.trainer import build_model, prepare_dataset, train, train_repeat
from acmlab.lab.metrics import ManifoldMetric
from acmlab.utils.data_loaders import Dataset, Split, load_dataset
from acmlab.utils.helpers import accuracy
from acmlab.utils.results import validate_run_dir

ROOT = Path(__file__).parent
SMALL_SBM = DatasetSpec(synth=SynthSpec(n=120, n_blocks=2, p_in=0.15, p_out=0.02, feat_dim=6, seed=3))


def _small_cfg(arch="sgc", variant="acm", n_layers=3, **train_kw):
    train_args = {"lr": 0.02, "weight_decay": 0.0, "max_epochs": 15, "patience": 5, "repeats": 2}
    train_args.update(train_kw)
    return RunConfig(
        dataset=SMALL_SBM,
        model=ModelConfig(arch=arch, variant=variant, n_layers=n_layers, hidden_dim=6, dropout_p=0.0),
        train=TrainConfig(**train_args),
    )


# --- configuration ---------------------------------------------------------------------

def test_load_bundled_configs():
    cfg = load_config(str(ROOT / "configs" / "triangle_gcn.json"))
    assert cfg.model.arch == "gcn"
    assert cfg.model.lam == 0.5
    assert os.path.isabs(cfg.dataset.path)
    assert load_dataset(cfg.dataset.path).n_nodes == 3

    sbm = load_config(str(ROOT / "configs" / "sbm_acm_sgc.json"))
    assert sbm.dataset.synth.n == 200
    assert sbm.model.n_layers == 64


def test_preset_fills_defaults_but_explicit_values_win():
    cfg = config_from_dict({"preset": "pubmed", "train": {"lr": 0.1}})
    assert cfg.train.lr == 0.1
    assert cfg.train.weight_decay == 1e-3
    assert cfg.model.dropout_p == 0.6
    assert RunConfig().with_preset("citeseer").train.weight_decay == 5e-4


@pytest.mark.parametrize("preset", ["cora", "citeseer", "coauthorcs", "pubmed"])
def test_preset_paths_agree(preset):
    from_dict = config_from_dict({"preset": preset})
    applied = config_from_dict({}).with_preset(preset)
    assert from_dict == applied
    with pytest.raises(ConfigError):
        RunConfig().with_preset("imagenet")


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"model": {"depth": 3}},
        {"model": {"arch": "mlp"}},
        {"model": {"arch": "gcn", "n_layers": 0}},
        {"model": {"n_layers": -1}},
        {"model": {"lam": 0.0}},
        {"model": {"dropout_p": 1.0}},
        {"train": {"lr": -0.1}},
        {"preset": "imagenet"},
        {"dataset": {"path": "x", "synth": {}}},
        {"scenario": "adversarial"},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{\"model\": ")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_missing_feature_scenario_zeroes_held_out_rows():
    ds = prepare_dataset(SMALL_SBM, "missing_feature")
    assert not ds.features[ds.split.val].any()
    assert not ds.features[ds.split.test].any()
    assert ds.features[ds.split.train].any()


# --- training --------------------------------------------------------------------------

def test_triangle_gcn_fits_the_training_set():
    fixture = load_dataset(str(ROOT / "data" / "fixtures" / "triangle"))
    ds = Dataset(graph=fixture.graph, features=fixture.features, labels=fixture.labels,
                 split=Split([0, 1, 2], [], []))
    cfg = RunConfig(
        dataset=DatasetSpec(path="unused"),
        model=ModelConfig(arch="gcn", variant="vanilla", n_layers=2, hidden_dim=8,
                          dropout_p=0.0, lam=0.5),
        train=TrainConfig(lr=0.05, weight_decay=0.0, max_epochs=200, patience=300, repeats=1),
    )
    summary = train(cfg, ds=ds, diagnostics=False)
    metrics = summary.metrics[0]
    last = metrics[(metrics.epoch == 200) & (metrics.split == "train")]
    assert last.accuracy.tolist() == [1.0]
    assert summary.repeats[0].epochs_run == 200


def test_training_is_deterministic():
    a = train(_small_cfg()).to_dict()
    b = train(_small_cfg()).to_dict()
    assert a == b


def test_zero_learning_rate_keeps_initial_accuracies():
    cfg = _small_cfg(arch="gcn", lr=0.0, max_epochs=8, patience=50, repeats=1)
    ds = prepare_dataset(cfg.dataset)
    summary = train(cfg, ds=ds, diagnostics=False)
    _, pred = build_model(ds, cfg, cfg.train.seed).predict(ds.features)
    masks = ds.masks()
    metrics = summary.metrics[0]
    for split in ("train", "val", "test"):
        accs = metrics[metrics.split == split].accuracy.unique()
        assert accs.tolist() == [accuracy(pred, ds.labels, masks[split])]


def test_early_stopping_and_aggregate():
    cfg = _small_cfg(max_epochs=200, patience=3, repeats=3)
    summary = train(cfg)
    for r in summary.repeats:
        assert r.epochs_run <= r.best_epoch + cfg.train.patience
        assert r.seed == cfg.train.seed + r.repeat
    agg = summary.aggregate()
    assert agg["repeats"] == 3
    assert agg["test_acc_mean"] == pytest.approx(np.mean(summary.test_accs))
    assert agg["test_acc_std"] == pytest.approx(np.std(summary.test_accs, ddof=1))


@pytest.mark.parametrize("arch", ["sgc", "gcn", "gat"])
@pytest.mark.parametrize("variant", ["vanilla", "acm", "acm_star"])
def test_every_model_trains(arch, variant):
    summary = train(_small_cfg(arch=arch, variant=variant, n_layers=2, max_epochs=5, repeats=1))
    r = summary.repeats[0]
    assert 0.0 <= r.test_acc <= 1.0
    assert summary.dispersion["final_layer"] == 2


def test_train_writes_a_valid_run_dir(tmp_path):
    cfg = _small_cfg(repeats=2).with_output_dir(str(tmp_path))
    train(cfg)
    assert (tmp_path / "config.json").exists()
    assert (tmp_path / "repeat-1" / "metrics.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["aggregate"]["repeats"] == 2
    assert validate_run_dir(str(tmp_path)) == []


def _diverge_on(bad_seeds, monkeypatch):
    def fake(ds, cfg, seed, repeat=0):
        if seed in bad_seeds:
            raise NonFiniteLoss(7, float("nan"))
        return train_repeat(ds, cfg, seed, repeat)

    monkeypatch.setattr("acmlab.experiments.trainer.train_repeat", fake)


def test_non_finite_loss_aborts_only_its_repeat(tmp_path, monkeypatch):
    cfg = _small_cfg(repeats=3).with_output_dir(str(tmp_path))
    _diverge_on({cfg.train.seed + 1}, monkeypatch)
    summary = train(cfg)
    assert [r.repeat for r in summary.repeats] == [0, 2]
    assert [(f.repeat, f.epoch) for f in summary.failed] == [(1, 7)]
    assert summary.aggregate()["repeats"] == 2
    assert summary.aggregate()["failed_repeats"] == 1
    assert (tmp_path / "repeat-2" / "metrics.csv").exists()
    assert not (tmp_path / "repeat-1").exists()
    written = json.loads((tmp_path / "summary.json").read_text())
    assert written["failed"][0]["seed"] == cfg.train.seed + 1
    assert validate_run_dir(str(tmp_path)) == []


def test_all_repeats_failing_raises(monkeypatch):
    cfg = _small_cfg(repeats=2)
    _diverge_on({cfg.train.seed, cfg.train.seed + 1}, monkeypatch)
    with pytest.raises(NonFiniteLoss):
        train(cfg)


# --- sweeps ------------------------------------------------------------------------------

def test_sweep_rows_and_single_depth(tmp_path):
    cfg = _small_cfg(repeats=2).with_output_dir(str(tmp_path))
    result = sweep_layers(cfg, [1, 4])
    assert len(result.table) == 2 * 2
    assert result.by_depth().depth.tolist() == [1, 4]

    single = train(_small_cfg(repeats=2).with_layers(1))
    assert [r.to_dict() for r in result.summaries[1].repeats] == [r.to_dict() for r in single.repeats]
    assert (tmp_path / "sweep.csv").read_text().count("\n") == 2 * 2 + 1
    assert validate_run_dir(str(tmp_path)) == []


def test_sweep_needs_depths():
    with pytest.raises(ConfigError):
        sweep_layers(_small_cfg(), [])


# --- dispersion ---------------------------------------------------------------------------

def test_sample_nodes():
    assert sample_nodes(10).tolist() == list(range(10))
    picked = sample_nodes(5000, limit=1000)
    assert len(picked) == 1000
    assert len(np.unique(picked)) == 1000
    assert np.array_equal(picked, sample_nodes(5000, limit=1000))


def test_layer_zero_dispersion_matches_direct_computation(tmp_path):
    cfg = _small_cfg(n_layers=4).with_output_dir(str(tmp_path))
    report = diagnose(cfg)
    ds = prepare_dataset(cfg.dataset)
    sphere = ManifoldSpec.identity(ds.features.shape[1])
    direct = ManifoldMetric(sphere).pair_values(project_pu(ds.features, sphere))
    first = report.profile.iloc[0]
    assert first.mean_pairwise == pytest.approx(direct.mean(), rel=1e-10)
    assert first.max_pairwise == pytest.approx(direct.max(), rel=1e-10)
    assert len(report.profile) == 5
    assert not report.trained
    assert validate_run_dir(str(tmp_path)) == []


def test_vanilla_sgc_dispersion_shrinks_with_depth():
    cfg = _small_cfg(variant="vanilla", n_layers=30)
    ds = prepare_dataset(cfg.dataset)
    profile = dispersion_profile(build_model(ds, cfg, 0), ds.features)
    summary = summarize_dispersion(profile)
    assert summary["final_layer"] == 30
    assert summary["final_to_first_ratio"] < 0.5


def test_trained_diagnose():
    report = diagnose(_small_cfg(max_epochs=3), trained=True)
    assert report.trained
    assert report.to_dict()["final_layer"] == 3


# --- desk-scale over-smoothing runs ----------------------------------------------------------

def _sbm_sgc(variant, n_layers, seed):
    return RunConfig(
        dataset=DatasetSpec(synth=SynthSpec(n=200, n_blocks=2, p_in=0.1, p_out=0.01,
                                            feat_dim=8, sigma=1.0, seed=seed)),
        model=ModelConfig(arch="sgc", variant=variant, n_layers=n_layers, dropout_p=0.0),
        train=TrainConfig(lr=0.01, weight_decay=5e-5, max_epochs=500, patience=100,
                          seed=seed, repeats=1),
    )


def _mean_test_acc(variant, n_layers, seeds=range(5)):
    return float(np.mean([
        train(_sbm_sgc(variant, n_layers, s), diagnostics=False).repeats[0].test_acc for s in seeds
    ]))


@pytest.mark.slow
def test_sgc_accuracy_gap_between_depths():
    # Measured means over seeds 0-4: vanilla 0.988 -> 0.50, ACM 0.996 -> 0.60.
    vanilla_4, vanilla_64 = _mean_test_acc("vanilla", 4), _mean_test_acc("vanilla", 64)
    acm_4, acm_64 = _mean_test_acc("acm", 4), _mean_test_acc("acm", 64)
    assert vanilla_4 >= 0.9 and acm_4 >= 0.9
    assert vanilla_4 - vanilla_64 >= 0.20
    assert acm_4 - acm_64 >= 0.20
    assert acm_64 >= vanilla_64


@pytest.mark.slow
def test_both_sgc_variants_collapse_at_depth():
    vanilla = diagnose(_sbm_sgc("vanilla", 120, 0)).summary
    acm = diagnose(_sbm_sgc("acm", 120, 0)).summary
    assert vanilla["final_to_first_ratio"] < 1e-3
    assert acm["final_to_first_ratio"] < 1e-3
    assert acm["final_mean_pairwise"] < 1e-3


@pytest.mark.slow
def test_missing_features_favour_depth():
    cfg = _sbm_sgc("acm", 1, 0).with_scenario("missing_feature")
    result = sweep_layers(cfg, [1, 2, 4, 8, 16, 32, 64])
    stats = result.by_depth()
    best = int(stats.loc[stats.test_acc_mean.idxmax(), "depth"])
    assert best >= 8


@pytest.mark.skipif(not os.environ.get("ACMLAB_CORA_DIR"), reason="ACMLAB_CORA_DIR not set")
@pytest.mark.parametrize("n_layers, expected, spread", [(5, 0.785, 0.025), (120, 0.770, 0.035)])
def test_cora_spot_check(n_layers, expected, spread):
    cfg = config_from_dict({
        "dataset": {"path": os.environ["ACMLAB_CORA_DIR"]},
        "preset": "cora",
        "model": {"arch": "sgc", "variant": "acm", "n_layers": n_layers},
        "train": {"repeats": 5},
    })
    agg = train(cfg, diagnostics=False).aggregate()
    assert abs(agg["test_acc_mean"] - expected) <= spread
