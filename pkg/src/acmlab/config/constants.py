"""Constants for tolerances, training defaults, output files and their schemas."""

# --- GEOMETRY GUARDS ---
# Norm floor for P_U and the PB denominator (compared against xUx^T, so squared).
EPS_NORM = 1e-12
# |w1 - a0| below this means w sits on the PF/PB projection center.
CENTER_GUARD = 1e-9
# Tolerance for "this row lies on M_U" checks in manifold_distance.
ON_MANIFOLD_TOL = 1e-8
# Hyperplane N_b used by PF; b = 0 is the equatorial chart.
DEFAULT_HYPERPLANE_B = 0.0

# --- ACM* PARAMETRIZATION ---
# u_diag = softplus(theta) + U_FLOOR, initialised so that u_diag == 1.
U_FLOOR = 1e-4

# --- CONTRACTION LAB ---
STRICTNESS_MARGIN = 1e-6
MONOTONE_SLACK = 1e-12
MAX_STORED_SNAPSHOTS = 100
# Dispersion diagnostics use at most this many nodes (pairwise cost is quadratic).
DISPERSION_SAMPLE_NODES = 1000

# --- GRADIENT CHECKING ---
FD_STEP = 1e-5
FD_REL_TOL = 1e-4
FD_ABS_FLOOR = 1e-7

# --- TRAINING DEFAULTS ---
DEFAULT_LAMBDA = 1.0
DEFAULT_LR = 5e-3
DEFAULT_WEIGHT_DECAY = 5e-5
DEFAULT_DROPOUT = 0.6
DEFAULT_HIDDEN = 16
DEFAULT_MAX_EPOCHS = 1000
DEFAULT_PATIENCE = 100
DEFAULT_REPEATS = 5
DEFAULT_SEED = 0
DEFAULT_LEAKY_RELU_ALPHA = 0.2
LOG_EVERY_EPOCHS = 50
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# Per-dataset hyperparameters; the loader accepts any dataset, these are presets.
HYPERPARAMETER_PRESETS = {
    "cora": {"lr": 5e-3, "weight_decay": 5e-5, "dropout_p": 0.6, "hidden_dim": 16},
    "citeseer": {"lr": 5e-3, "weight_decay": 5e-4, "dropout_p": 0.6, "hidden_dim": 16},
    "coauthorcs": {"lr": 5e-3, "weight_decay": 5e-5, "dropout_p": 0.6, "hidden_dim": 16},
    "pubmed": {"lr": 1e-2, "weight_decay": 1e-3, "dropout_p": 0.6, "hidden_dim": 16},
}

# Default depth grids for layer sweeps.
DEFAULT_LAYER_GRID = {
    "sgc": [5, 60, 120],
    "gcn": [2, 15, 30, 45, 60],
    "gat": [2, 15, 30, 45, 60],
}

# --- SYNTHETIC DATA DEFAULTS ---
SBM_TRAIN_PER_CLASS = 20
SBM_VAL_PER_CLASS = 30
SBM_DEFAULT_SIGMA = 1.0

# --- DATASET FILE NAMES ---
EDGES_FILE = "edges.tsv"
FEATURES_FILE = "features.csv"
LABELS_FILE = "labels.csv"
SPLITS_FILE = "splits.json"
# Decimal digits written for features; 17 significant digits round-trip float64.
FEATURE_DIGITS = 17

# --- RUN OUTPUT FILES ---
RUNS_DIR = "runs"
METRICS_FILE = "metrics.csv"
SWEEP_FILE = "sweep.csv"
SWEEP_CHART_FILE = "sweep.svg"
SUMMARY_FILE = "summary.json"
TRAJECTORY_FILE = "trajectory.csv"
REPORT_FILE = "report.json"
DISPERSION_FILE = "dispersion.csv"
DISPERSION_CHART_FILE = "dispersion.svg"
CONFIG_ECHO_FILE = "config.json"

# Column schemas checked by `acmlab self-check`.
CSV_SCHEMAS = {
    METRICS_FILE: ["epoch", "split", "loss", "accuracy"],
    SWEEP_FILE: ["depth", "repeat", "seed", "best_val_acc", "test_acc"],
    TRAJECTORY_FILE: ["step", "max_pairwise", "mean_pairwise", "max_to_ref"],
    DISPERSION_FILE: ["layer", "mean_pairwise", "max_pairwise"],
}
SPLIT_NAMES = ("train", "val", "test")

# --- EXIT CODES ---
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
