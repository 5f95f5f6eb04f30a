"""Command-line entry point: `acmlab <command> [options]`."""

import argparse
import logging
import sys

from acmlab.config.constants import DEFAULT_LAYER_GRID, EXIT_DATA, EXIT_NUMERICAL, EXIT_OK
from acmlab.config.settings import RunConfig, Scenario, SynthSpec, load_config
from acmlab.errors import AcmLabError, ConfigError
from acmlab.experiments.diagnose import diagnose
from acmlab.experiments.sweep import sweep_layers
from acmlab.experiments.theory import run_theory_checks
from acmlab.experiments.trainer import train
from acmlab.utils.data_loaders import write_dataset
from acmlab.utils.helpers import format_accuracy, parse_int_list
from acmlab.utils.results import validate_run_dir
from acmlab.utils.synthetic import synth_sbm
from acmlab.utils.time_utils import default_run_dir

logger = logging.getLogger("acmlab")


def _single_depth(text) -> int:
    depths = parse_int_list(text)
    if len(depths) != 1:
        raise ConfigError(f"--layers takes one depth here, got {text!r}")
    return depths[0]


def _resolve_config(args, command: str) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.preset:
        cfg = cfg.with_preset(args.preset)
    if args.scenario:
        cfg = cfg.with_scenario(args.scenario)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "layers", None) is not None and command != "sweep":
        cfg = cfg.with_layers(_single_depth(args.layers))
    out = args.out or cfg.output_dir or default_run_dir(command)
    return cfg.with_output_dir(out)


def cmd_train(args) -> int:
    cfg = _resolve_config(args, "train")
    summary = train(cfg)
    agg = summary.aggregate()
    print(
        f"{cfg.model.variant} {cfg.model.arch} x{cfg.model.n_layers}: test accuracy "
        f"{format_accuracy(agg['test_acc_mean'], agg['test_acc_std'])} over {agg['repeats']} repeats"
    )
    for failed in summary.failed:
        print(f"repeat {failed.repeat} (seed {failed.seed}) aborted: {failed.reason}")
    print(f"results: {cfg.output_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args, "sweep")
    layers = parse_int_list(args.layers) if args.layers else DEFAULT_LAYER_GRID[cfg.model.arch]
    result = sweep_layers(cfg, layers)
    for row in result.by_depth().itertuples():
        print(f"depth {row.depth:>4}: {format_accuracy(row.test_acc_mean, row.test_acc_std)}")
    print(f"results: {cfg.output_dir}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = _resolve_config(args, "diagnose")
    report = diagnose(cfg, trained=args.trained)
    s = report.summary
    print(
        f"layer {s['final_layer']}: mean pairwise {s['final_mean_pairwise']:.4e}, "
        f"max pairwise {s['final_max_pairwise']:.4e}"
    )
    print(f"results: {cfg.output_dir}")
    return EXIT_OK


def cmd_check_theory(args) -> int:
    out = args.out or default_run_dir("check-theory")
    outcomes = run_theory_checks(seed=args.seed or 0, n_samples=args.samples, out_dir=out)
    for o in outcomes:
        print(f"[{'ok' if o.passed else 'FAIL'}] {o.name}: {o.observed}")
    print(f"results: {out}")
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_NUMERICAL


def cmd_synth(args) -> int:
    spec = SynthSpec()
    if args.config:
        cfg = load_config(args.config)
        spec = cfg.dataset.synth or spec
    ds = synth_sbm(
        n=args.n if args.n is not None else spec.n,
        n_blocks=args.blocks if args.blocks is not None else spec.n_blocks,
        p_in=args.p_in if args.p_in is not None else spec.p_in,
        p_out=args.p_out if args.p_out is not None else spec.p_out,
        feat_dim=args.feat_dim if args.feat_dim is not None else spec.feat_dim,
        sigma=args.sigma if args.sigma is not None else spec.sigma,
        seed=args.seed if args.seed is not None else spec.seed,
    )
    write_dataset(ds, args.out)
    print(f"wrote {ds.n_nodes} nodes, {ds.graph.n_edges} edges to {args.out}")
    return EXIT_OK


def cmd_self_check(args) -> int:
    problems = validate_run_dir(args.run_dir)
    for p in problems:
        print(p)
    if problems:
        return EXIT_DATA
    print(f"{args.run_dir}: all result files conform")
    return EXIT_OK


def _run_options(p, layers_help="number of aggregation layers"):
    p.add_argument("--config", help="run configuration (JSON)")
    p.add_argument("--out", help="output directory (default runs/<stamp>-<command>)")
    p.add_argument("--seed", type=int, help="override train.seed")
    p.add_argument("--preset", help="hyperparameter preset: cora, citeseer, coauthorcs, pubmed")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--layers", help=layers_help)


def _parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="acmlab",
        description="Deep GNNs on compact manifolds: training, depth sweeps and contraction checks.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model (all repeats)")
    _run_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="accuracy versus depth")
    _run_options(p, layers_help="comma-separated depths (default per architecture)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="per-layer dispersion of the embeddings")
    _run_options(p)
    p.add_argument("--trained", action="store_true", help="train before measuring")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("check-theory", help="run the contraction / collapse checks")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000, help="samples per contraction check")
    p.set_defaults(func=cmd_check_theory)

    p = sub.add_parser("synth", help="write a stochastic block model dataset")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--config", help="take defaults from dataset.synth of this config")
    p.add_argument("--n", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--feat-dim", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("self-check", help="validate the files of a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_self_check)

    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AcmLabError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
