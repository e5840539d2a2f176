"""Command-line entry point: ``ta-explore run|plot|true-values``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .envs import RandomWalkEnv, rw_true_values
from .harness import OUT_ENV_VAR, ExperimentFailed, resolve_out_dir, run_experiment
from .plotting import SchemaError, plot_emit


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ta-explore", description="Annealed assistant-reward experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (overrides ${OUT_ENV_VAR} and the config)")
    run.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    run.add_argument("--seed", type=int, default=None, help="override master_seed")

    plot = sub.add_parser("plot", help="plot aggregated CSVs as an SVG")
    plot.add_argument("csv", nargs="+")
    plot.add_argument("--out", default="curves.svg")
    plot.add_argument("--title", default="")
    plot.add_argument("--window", type=int, default=50)
    plot.add_argument("--labels", nargs="+", default=None)

    tv = sub.add_parser("true-values", help="print exact random-walk state values")
    tv.add_argument("--size", type=int, choices=(5, 11, 33), required=True)
    tv.add_argument("--reward", choices=("target", "assist"), default="target")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    if args.command == "true-values":
        v = rw_true_values(RandomWalkEnv.from_size(args.size), args.reward)
        for i, x in enumerate(v, start=1):
            print(f"{i}\t{float(x)!r}")
        return 0

    if args.command == "plot":
        try:
            path = plot_emit(args.csv, args.out, labels=args.labels, window=args.window, title=args.title)
        except (SchemaError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(path)
        return 0

    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = config.replace(master_seed=args.seed)
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    out = resolve_out_dir(config, args.out)
    try:
        summary = run_experiment(config, out, workers=args.workers)
    except ExperimentFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for label, v in summary["variants"].items():
        extra = ""
        if "episodes_to_baseline_threshold" in v:
            extra = f"  episodes-to-threshold={v['episodes_to_baseline_threshold']}"
        print(f"{label}: final moving average {v['final_moving_average']:.6g}{extra}")
    print(f"outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
