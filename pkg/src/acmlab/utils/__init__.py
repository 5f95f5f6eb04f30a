"""Dataset IO, synthetic data, result files and small helpers."""

from .helpers import accuracy, mean_std, parse_int_list, format_duration, format_accuracy
from .data_loaders import (
    Dataset,
    Split,
    load_dataset,
    write_dataset,
    apply_missing_features,
)
from .synthetic import (
    synth_sbm,
    planted_modularity,
    random_connected_graph,
    path_graph,
    cycle_graph,
    complete_graph,
    disjoint_union,
)
from .time_utils import iso_timestamp, run_dir_name, default_run_dir
from .results import write_csv, write_json, read_json, validate_run_dir

__all__ = [
    # helpers
    "accuracy",
    "mean_std",
    "parse_int_list",
    "format_duration",
    "format_accuracy",
    # data_loaders
    "Dataset",
    "Split",
    "load_dataset",
    "write_dataset",
    "apply_missing_features",
    # synthetic
    "synth_sbm",
    "planted_modularity",
    "random_connected_graph",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "disjoint_union",
    # time_utils
    "iso_timestamp",
    "run_dir_name",
    "default_run_dir",
    # results
    "write_csv",
    "write_json",
    "read_json",
    "validate_run_dir",
]
