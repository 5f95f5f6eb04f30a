"""Accuracy as a function of depth."""

import logging
import os
from dataclasses import dataclass

import pandas as pd

from acmlab.config.constants import CSV_SCHEMAS, SUMMARY_FILE, SWEEP_CHART_FILE, SWEEP_FILE
from acmlab.config.settings import RunConfig
from acmlab.errors import ConfigError
from acmlab.experiments.trainer import RunSummary, prepare_dataset, train
from acmlab.utils.results import line_chart, save_chart, write_csv, write_json

logger = logging.getLogger(__name__)


@dataclass
class SweepResult:
    table: pd.DataFrame
    summaries: dict

    def by_depth(self) -> pd.DataFrame:
        """Mean and sample std of test accuracy per depth."""
        stats = (
            self.table.groupby("depth")["test_acc"]
            .agg(test_acc_mean="mean", test_acc_std="std")
            .reset_index()
        )
        return stats.fillna({"test_acc_std": 0.0})


def sweep_layers(cfg: RunConfig, layer_list) -> SweepResult:
    """Train cfg at every depth in `layer_list` (repeats each).

    Writes sweep.csv, sweep.svg and summary.json when cfg.output_dir is set.
    """
    layer_list = [int(d) for d in layer_list]
    if not layer_list:
        raise ConfigError("layer list must not be empty")
    ds = prepare_dataset(cfg.dataset, cfg.scenario)

    rows, summaries = [], {}
    for depth in layer_list:
        summary: RunSummary = train(cfg.with_layers(depth).with_output_dir(None), ds=ds)
        summaries[depth] = summary
        for r in summary.repeats:
            rows.append((depth, r.repeat, r.seed, r.best_val_acc, r.test_acc))
        agg = summary.aggregate()
        logger.info(
            "depth %d: test %.3f ± %.3f", depth, agg["test_acc_mean"], agg["test_acc_std"]
        )

    result = SweepResult(pd.DataFrame(rows, columns=CSV_SCHEMAS[SWEEP_FILE]), summaries)
    if cfg.output_dir:
        _write_sweep(cfg, result)
    return result


def _write_sweep(cfg: RunConfig, result: SweepResult) -> None:
    out = cfg.output_dir
    write_csv(result.table, os.path.join(out, SWEEP_FILE))
    title = f"{cfg.model.variant} {cfg.model.arch}: test accuracy vs depth"
    save_chart(line_chart(result.by_depth(), "depth", "test_acc_mean", title=title),
               os.path.join(out, SWEEP_CHART_FILE))
    write_json(
        {
            "config": cfg.to_dict(),
            "aggregate": {str(d): s.aggregate() for d, s in result.summaries.items()},
            "dispersion": {str(d): s.dispersion for d, s in result.summaries.items()},
        },
        os.path.join(out, SUMMARY_FILE),
    )
