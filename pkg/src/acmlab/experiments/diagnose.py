"""Over-smoothing diagnostics for one configuration."""

import logging
import os
from dataclasses import dataclass

import pandas as pd

from acmlab.config.constants import DISPERSION_CHART_FILE, DISPERSION_FILE, SUMMARY_FILE
from acmlab.config.settings import RunConfig
from acmlab.experiments.dispersion import dispersion_profile, summarize_dispersion
from acmlab.experiments.trainer import build_model, prepare_dataset, train_repeat
from acmlab.utils.results import line_chart, save_chart, write_csv, write_json

logger = logging.getLogger(__name__)


@dataclass
class DispersionReport:
    profile: pd.DataFrame
    summary: dict
    trained: bool

    def to_dict(self) -> dict:
        return {"trained": self.trained, **self.summary}


def diagnose(cfg: RunConfig, trained: bool = False) -> DispersionReport:
    """Per-layer dispersion of a freshly initialised (or trained) model.

    Writes dispersion.csv, dispersion.svg and summary.json when
    cfg.output_dir is set.
    """
    ds = prepare_dataset(cfg.dataset, cfg.scenario)
    if trained:
        _, _, model = train_repeat(ds, cfg, cfg.train.seed)
    else:
        model = build_model(ds, cfg, cfg.train.seed)
    profile = dispersion_profile(model, ds.features)
    report = DispersionReport(profile=profile, summary=summarize_dispersion(profile), trained=trained)
    logger.info(
        "%s %s depth %d: final mean pairwise %.3e (ratio to first aggregation %.3e)",
        cfg.model.variant, cfg.model.arch, cfg.model.n_layers,
        report.summary["final_mean_pairwise"], report.summary["final_to_first_ratio"],
    )

    if cfg.output_dir:
        out = cfg.output_dir
        write_csv(profile, os.path.join(out, DISPERSION_FILE))
        save_chart(
            line_chart(profile, "layer", "mean_pairwise", title="mean pairwise distance per layer"),
            os.path.join(out, DISPERSION_CHART_FILE),
        )
        write_json(
            {"config": cfg.to_dict(), "aggregate": {}, "dispersion": report.to_dict()},
            os.path.join(out, SUMMARY_FILE),
        )
    return report
