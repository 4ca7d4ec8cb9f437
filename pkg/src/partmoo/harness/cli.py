"""Command line entry point: ``partmoo run`` and ``partmoo region-exp``."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from ..benchmarks import BenchmarkError, TableParseError, make_benchmark
from ..hypervolume import HvConfig
from ..partition import PartitionParams
from ..selection import ABSOLUTE, FRACTION, SelectionConfig
from ..svm import KernelSpec
from .experiment import ExperimentAborted, ExperimentConfig, region_quality_experiment, run_experiment
from .output import emit_csv, emit_plot

EXIT_CONFIG = 2
EXIT_BENCHMARK = 3


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--benchmark", default="synthetic-nas",
                        help="branin-currin | synthetic-nas[:seed] | tabular:<path>")
    parser.add_argument("--sampler", choices=("random", "cmaes", "bo"), default="random")
    parser.add_argument("--use-partition", type=_bool, default=True)
    parser.add_argument("--selection", choices=("path", "leaf"), default="leaf")
    parser.add_argument("--budget", type=int, default=300)
    parser.add_argument("--init", type=int, default=10)
    parser.add_argument("--batch", type=int, default=5)
    cp = parser.add_mutually_exclusive_group()
    cp.add_argument("--cp-frac", type=float, default=None,
                    help="exploration constant as a fraction of the current hypervolume (default 0.1)")
    cp.add_argument("--cp-abs", type=float, default=None, help="absolute exploration constant")
    parser.add_argument("--kernel", choices=("rbf", "linear", "poly"), default="rbf")
    parser.add_argument("--svm-c", type=float, default=1.0)
    parser.add_argument("--max-depth", type=int, default=6)
    parser.add_argument("--min-leaf", type=int, default=8)
    parser.add_argument("--mc-hv", type=int, default=200_000, help="Monte Carlo draws for M > 3")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--backprop", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partmoo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one optimization and write per-iteration CSV")
    _common(run)
    run.add_argument("--out", required=True, help="CSV output path")
    run.add_argument("--plot", help="optional SVG of hypervolume against samples")
    run.add_argument("--dump-tree", help="optional JSON dump of the final partition tree")
    region = sub.add_parser("region-exp", help="compare probe hypervolume in good, whole and bad regions")
    _common(region)
    region.add_argument("--probes", type=int, default=50)
    region.add_argument("--repeats", type=int, default=150)
    region.add_argument("--out", help="CSV with one row per repeat")
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.cp_abs is not None:
        selection = SelectionConfig(args.selection, cp=args.cp_abs, cp_mode=ABSOLUTE)
    else:
        frac = 0.1 if args.cp_frac is None else args.cp_frac
        selection = SelectionConfig(args.selection, cp_mode=FRACTION, fraction=frac)
    partition = PartitionParams(args.max_depth, args.min_leaf, KernelSpec(args.kernel), args.svm_c)
    return ExperimentConfig(
        benchmark=args.benchmark, sampler=args.sampler, use_partition=args.use_partition,
        selection=selection, budget=args.budget, n_init=args.init, batch=args.batch,
        partition=partition, hv=HvConfig(mc_samples=args.mc_hv, mc_seed=args.seed), seed=args.seed,
        backprop=args.backprop,
    )


def _run(args, cfg, bench) -> None:
    result = run_experiment(cfg, bench)
    emit_csv(result, args.out)
    if args.plot:
        metric = "hv_log_diff" if bench.hv_max is not None else "hypervolume"
        emit_plot([result], args.plot, metric)
    if args.dump_tree:
        if result.tree is None:
            raise ValueError("--dump-tree needs --use-partition true")
        result.tree.dump(args.dump_tree)
    last = result.records[-1]
    print(f"{result.run_id}: {last.samples_used} samples, hypervolume {last.hypervolume:.6f}")


def _region(args, cfg, bench) -> None:
    res = region_quality_experiment(cfg, args.probes, args.repeats, bench)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["repeat", "good", "whole", "bad"])
            for k, row in enumerate(zip(res.good, res.whole, res.bad)):
                writer.writerow([k, *(repr(float(v)) for v in row)])
    for name in ("good", "whole", "bad"):
        values = getattr(res, name)
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        print(f"{name:>5}: median {med:.6f}  IQR {q3 - q1:.6f}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        bench = make_benchmark(cfg.benchmark)
    except (ValueError, TableParseError, OSError) as exc:
        print(f"partmoo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            _run(args, cfg, bench)
        else:
            _region(args, cfg, bench)
    except (BenchmarkError, ExperimentAborted) as exc:
        print(f"partmoo: benchmark error: {exc}", file=sys.stderr)
        return EXIT_BENCHMARK
    except ValueError as exc:
        print(f"partmoo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
