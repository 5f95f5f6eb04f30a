"""Full-batch training with Adam, early stopping and best-validation checkpointing."""

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.special import log_softmax

from acmlab.config.constants import (
    CONFIG_ECHO_FILE,
    CSV_SCHEMAS,
    LOG_EVERY_EPOCHS,
    METRICS_FILE,
    SPLIT_NAMES,
    SUMMARY_FILE,
)
from acmlab.config.settings import DatasetSpec, RunConfig, Scenario
from acmlab.engine.autodiff import Tape
from acmlab.engine.optim import AdamState, adam_step, derive_seed
from acmlab.errors import NonFiniteLoss
from acmlab.experiments.dispersion import dispersion_profile, summarize_dispersion
from acmlab.models.gnn import GNNModel
from acmlab.utils.data_loaders import Dataset, apply_missing_features, load_dataset
from acmlab.utils.helpers import accuracy, format_duration, mean_std
from acmlab.utils.results import write_csv, write_json
from acmlab.utils.synthetic import synth_sbm
from acmlab.utils.time_utils import now_utc, seconds_since

logger = logging.getLogger(__name__)


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    best_val_acc: float
    test_acc: float
    train_acc: float
    best_epoch: int
    epochs_run: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class FailedRepeat:
    repeat: int
    seed: int
    epoch: int
    reason: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunSummary:
    """Per-repeat results plus their mean and sample standard deviation.

    `repeats` and `metrics` hold the repeats that finished; repeats whose loss
    stopped being finite are listed in `failed` and left out of the aggregate.
    """

    repeats: list
    metrics: list = field(default_factory=list, repr=False)
    dispersion: dict | None = None
    failed: list = field(default_factory=list)

    @property
    def test_accs(self) -> list[float]:
        return [r.test_acc for r in self.repeats]

    @property
    def val_accs(self) -> list[float]:
        return [r.best_val_acc for r in self.repeats]

    def aggregate(self) -> dict:
        test_mean, test_std = mean_std(self.test_accs)
        val_mean, val_std = mean_std(self.val_accs)
        return {
            "repeats": len(self.repeats),
            "test_acc_mean": test_mean,
            "test_acc_std": test_std,
            "val_acc_mean": val_mean,
            "val_acc_std": val_std,
            "epochs_run_mean": float(np.mean([r.epochs_run for r in self.repeats])),
            "failed_repeats": len(self.failed),
        }

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate(),
            "repeats": [r.to_dict() for r in self.repeats],
            "failed": [f.to_dict() for f in self.failed],
            "dispersion": self.dispersion,
        }


def prepare_dataset(spec: DatasetSpec, scenario=Scenario.STANDARD) -> Dataset:
    """Load or synthesise the dataset and apply the evaluation scenario."""
    if spec.path is not None:
        ds = load_dataset(spec.path)
    else:
        s = spec.synth
        ds = synth_sbm(s.n, s.n_blocks, s.p_in, s.p_out, s.feat_dim, s.sigma, s.seed)
    if scenario == Scenario.MISSING_FEATURE:
        ds = apply_missing_features(ds)
    return ds


def _split_metrics(logits, labels, masks):
    logp = log_softmax(logits, axis=1)
    pred = np.argmax(logits, axis=1)
    out = {}
    for name in SPLIT_NAMES:
        mask = masks[name]
        loss = float(-logp[mask, labels[mask]].mean()) if mask.any() else float("nan")
        out[name] = (loss, accuracy(pred, labels, mask))
    return out


def build_model(ds: Dataset, cfg: RunConfig, seed: int) -> GNNModel:
    n_classes = cfg.model.n_classes or ds.n_classes
    return GNNModel(cfg.model, ds.graph, ds.features.shape[1], n_classes, seed=seed)


def train_repeat(ds: Dataset, cfg: RunConfig, seed: int, repeat: int = 0):
    """Train one model from scratch.

    The model is evaluated after every epoch; the parameters with the best
    validation accuracy (earliest on ties) are restored at the end.

    Returns:
        (RepeatResult, metrics DataFrame, trained GNNModel)

    Raises:
        NonFiniteLoss: the training loss became NaN or infinite
    """
    tcfg = cfg.train
    model = build_model(ds, cfg, seed)
    state = AdamState(lr=tcfg.lr, weight_decay=tcfg.weight_decay)
    masks = ds.masks()
    X, labels = ds.features, ds.labels

    rows = []
    best = {"val": -1.0, "epoch": 0, "test": 0.0, "train": 0.0, "params": model.snapshot()}
    epoch = 0
    for epoch in range(1, tcfg.max_epochs + 1):
        tape = Tape()
        result = model.forward(tape, X, train=True, seed=derive_seed(seed, "epoch", epoch))
        loss = tape.masked_nll(tape.log_softmax_rows(result.logits), labels, masks["train"])
        value = float(loss.value[0, 0])
        if not np.isfinite(value):
            raise NonFiniteLoss(epoch, value)
        adam_step(model.params, tape.backward(loss), state)

        evaluation = _split_metrics(model.forward(Tape(), X).logits.value, labels, masks)
        for name in SPLIT_NAMES:
            rows.append((epoch, name, *evaluation[name]))
        val_acc = evaluation["val"][1]
        if val_acc > best["val"]:
            best = {
                "val": val_acc,
                "epoch": epoch,
                "test": evaluation["test"][1],
                "train": evaluation["train"][1],
                "params": model.snapshot(),
            }
        if epoch % LOG_EVERY_EPOCHS == 0:
            logger.debug(
                "repeat %d epoch %d: loss %.4f train %.3f val %.3f",
                repeat, epoch, value, evaluation["train"][1], val_acc,
            )
        if epoch - best["epoch"] >= tcfg.patience:
            break

    model.load(best["params"])
    result = RepeatResult(
        repeat=repeat,
        seed=seed,
        best_val_acc=best["val"],
        test_acc=best["test"],
        train_acc=best["train"],
        best_epoch=best["epoch"],
        epochs_run=epoch,
    )
    logger.info(
        "repeat %d (seed %d): best val %.3f at epoch %d, test %.3f, %d epochs",
        repeat, seed, result.best_val_acc, result.best_epoch, result.test_acc, epoch,
    )
    return result, pd.DataFrame(rows, columns=CSV_SCHEMAS[METRICS_FILE]), model


def train(cfg: RunConfig, ds: Dataset | None = None, diagnostics: bool = True) -> RunSummary:
    """Train `cfg.train.repeats` models with seeds seed, seed + 1, ...

    Writes config.json, summary.json and repeat-<r>/metrics.csv when
    cfg.output_dir is set. A repeat whose loss becomes NaN or infinite is
    recorded as failed and the remaining repeats still run.

    Raises:
        NonFiniteLoss: every repeat failed
    """
    ds = prepare_dataset(cfg.dataset, cfg.scenario) if ds is None else ds
    started = now_utc()
    repeats, metrics, failed, model = [], [], [], None
    for r in range(cfg.train.repeats):
        seed = cfg.train.seed + r
        try:
            result, frame, model = train_repeat(ds, cfg, seed, repeat=r)
        except NonFiniteLoss as exc:
            logger.warning("repeat %d (seed %d) aborted: %s", r, seed, exc)
            failed.append(FailedRepeat(repeat=r, seed=seed, epoch=exc.epoch, reason=str(exc)))
            if len(failed) == cfg.train.repeats:
                raise
            continue
        repeats.append(result)
        metrics.append(frame)
    logger.info(
        "%s %s x%d: %d repeats in %s",
        cfg.model.variant, cfg.model.arch, cfg.model.n_layers, len(repeats),
        format_duration(seconds_since(started)),
    )

    dispersion = None
    if diagnostics and model is not None:
        dispersion = summarize_dispersion(dispersion_profile(model, ds.features))
    summary = RunSummary(repeats=repeats, metrics=metrics, dispersion=dispersion, failed=failed)

    if cfg.output_dir:
        write_run(cfg, summary)
    return summary


def write_run(cfg: RunConfig, summary: RunSummary) -> None:
    out = cfg.output_dir
    write_json(cfg.to_dict(), os.path.join(out, CONFIG_ECHO_FILE), stamp=False)
    for result, frame in zip(summary.repeats, summary.metrics):
        write_csv(frame, os.path.join(out, f"repeat-{result.repeat}", METRICS_FILE))
    write_json({"config": cfg.to_dict(), **summary.to_dict()}, os.path.join(out, SUMMARY_FILE))
    logger.info("results written to %s", out)
