"""Command-line runner: ``poco run <scenario> --config PATH [--seed N] [--rounds T] [--epsilon E]... [--out PATH]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from poco.config import DEFAULTS, SCENARIOS, ConfigError, load_config
from poco.experiment import GuaranteeViolation, emit_csv, run_experiment

log = logging.getLogger("poco")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poco", description="Predictive online convex optimization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario and print a JSON summary")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--config", help="YAML file; scenario defaults are used for missing keys")
    run.add_argument("--seed", type=int)
    run.add_argument("--rounds", type=int, help="horizon T")
    run.add_argument("--epsilon", type=float, action="append", help="forecast error bound; repeatable")
    run.add_argument("--out", help="CSV trace path")
    run.add_argument("--no-check", action="store_true", help="record guarantee violations instead of aborting")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace):
    cfg = load_config(args.config, args.scenario) if args.config else DEFAULTS[args.scenario]
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.rounds is not None:
        overrides["T"] = args.rounds
    if args.epsilon:
        overrides["epsilons"] = tuple(args.epsilon)
    if args.out is not None:
        overrides["out"] = args.out
    if args.no_check:
        overrides["check_guarantees"] = False
    return replace(cfg, **overrides) if overrides else cfg


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"poco: configuration error: {exc}", file=sys.stderr)
        return 2
    log.info("running %s for %d rounds, seed %d", cfg.scenario, cfg.T, cfg.seed)
    try:
        result = run_experiment(cfg)
    except GuaranteeViolation as exc:
        print(f"poco: guarantee violated: {exc}", file=sys.stderr)
        return 3
    summary = dict(result.summary)
    if cfg.out:
        try:
            path = emit_csv(result.traces, cfg.out, result.algorithms, result.predictive)
        except OSError as exc:
            print(f"poco: {exc}", file=sys.stderr)
            return 4
        summary["csv"] = str(path)
    json.dump(summary, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
