"""Timestamps for run directories and result files."""

import os

import pendulum

from acmlab.config.constants import RUNS_DIR

RUN_STAMP_FORMAT = "YYYYMMDD-HHmmss"


def now_utc() -> pendulum.DateTime:
    return pendulum.now("UTC")


def iso_timestamp(moment: pendulum.DateTime | None = None) -> str:
    """UTC ISO-8601 stamp written into summary.json and report.json."""
    return (moment or now_utc()).in_timezone("UTC").to_iso8601_string()


def run_dir_name(command: str, moment: pendulum.DateTime | None = None) -> str:
    """'<YYYYMMDD-HHmmss>-<command>' in UTC."""
    return f"{(moment or now_utc()).in_timezone('UTC').format(RUN_STAMP_FORMAT)}-{command}"


def default_run_dir(command: str, root: str = RUNS_DIR, moment: pendulum.DateTime | None = None) -> str:
    return os.path.join(root, run_dir_name(command, moment))


def seconds_since(start: pendulum.DateTime) -> float:
    return (now_utc() - start).total_seconds()
