"""Command-line experiment runner.

Builds an experiment configuration from an optional ``key = value`` config
file plus flag overrides, runs the alpha sweep, and writes the CSV curve.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (the
per-row exclusion budget was exceeded).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .experiment import (
    ConfigError,
    ExclusionBudgetError,
    ExperimentConfig,
    parse_config_file,
    run_sweep,
    write_csv,
)
from .statistics import StatisticKind

__all__ = ["build_parser", "main", "entrypoint"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopsense",
        description=(
            "Sweep the shadowing-to-noise ratio alpha and report the average "
            "missed-opportunity probability per detection statistic."
        ),
    )
    parser.add_argument("--config", metavar="PATH", help="key = value config file")
    parser.add_argument("--seed", type=int, help="root RNG seed (u64)")
    parser.add_argument("--output", metavar="PATH", help="output CSV path")
    parser.add_argument(
        "--statistics",
        metavar="LIST",
        help="comma-separated subset of llr,gllr,qm,lm",
    )
    parser.add_argument("--alpha-min", type=float, help="lowest alpha of the log grid")
    parser.add_argument("--alpha-max", type=float, help="highest alpha of the log grid")
    parser.add_argument("--alpha-steps", type=int, help="number of log-grid points")
    parser.add_argument("--placements", type=int, help="random placements per alpha")
    parser.add_argument(
        "--mc-samples", type=int, help="Monte Carlo samples per probability estimate"
    )
    parser.add_argument(
        "--workers", type=int, default=1, help="parallel worker processes (default 1)"
    )
    return parser


def _apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    updates: dict = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.output is not None:
        updates["output_path"] = args.output
    if args.statistics is not None:
        kinds: list[StatisticKind] = []
        for part in args.statistics.split(","):
            if part.strip():
                kind = StatisticKind.parse(part)
                if kind not in kinds:
                    kinds.append(kind)
        updates["statistics"] = tuple(kinds)
    if args.placements is not None:
        updates["n_placements"] = args.placements
    if args.mc_samples is not None:
        updates["mc_samples"] = args.mc_samples
    if (
        args.alpha_min is not None
        or args.alpha_max is not None
        or args.alpha_steps is not None
    ):
        lo = args.alpha_min if args.alpha_min is not None else 0.1
        hi = args.alpha_max if args.alpha_max is not None else 10.0
        steps = args.alpha_steps if args.alpha_steps is not None else 15
        if lo <= 0 or hi < lo or steps < 1:
            raise ConfigError("alpha grid flags require 0 < alpha-min <= alpha-max, steps >= 1")
        updates["alpha_grid"] = tuple(
            float(a) for a in np.logspace(np.log10(lo), np.log10(hi), steps)
        )
    return replace(config, **updates)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        config = parse_config_file(args.config) if args.config else ExperimentConfig()
        config = _apply_overrides(config, args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rows = run_sweep(config, workers=args.workers)
    except ExclusionBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    write_csv(rows, config.output_path)
    print(f"wrote {len(rows)} rows to {config.output_path}")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
