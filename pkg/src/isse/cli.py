"""Command-line entry point.

    isse --scenario tiny.scenario --mode issev2 --top-k 3 --per-eval-cost 1

Exit codes: 0 success, 1 empty solution space, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import DEFAULT_BRUTEFORCE_CAP
from .errors import EmptySolutionSpace, IsseError
from .pipeline import MODES, run_mode
from .scenario_io import load_scenario, solution_to_dict, write_report

log = logging.getLogger("isse")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("expected a non-negative number")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isse", description="Layered solution-space exploration for "
                                "production reconfiguration: brute force vs. intelligent exploration.")
    p.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--parallel", type=_positive_int, default=1, help="worker threads for sub-spaces")
    p.add_argument("--top-k", type=_positive_int, default=3, help="layout variants kept per configuration (issev2)")
    p.add_argument("--per-eval-cost", type=_non_negative, default=0.0,
                   help="synthetic seconds booked per simulation run")
    p.add_argument("--sleep", action="store_true", help="actually wait --per-eval-cost per simulation")
    p.add_argument("--report", choices=("table", "csv"), default="table")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--finals", type=Path, help="write final solutions as JSON")
    p.add_argument("--no-nogo", action="store_true", help="disable the standby-power no-go filter")
    p.add_argument("--no-ranking", action="store_true", help="disable level-3 ranking (keep every candidate)")
    p.add_argument("--cap", type=_positive_int, default=DEFAULT_BRUTEFORCE_CAP,
                   help="largest brute-force space that is actually enumerated")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = load_scenario(args.scenario)
        outcome = run_mode(scenario, args.mode, seed=args.seed, parallel=args.parallel, top_k=args.top_k,
                           per_eval_cost=args.per_eval_cost, sleep=args.sleep, nogo=not args.no_nogo,
                           ranking=not args.no_ranking, cap=args.cap)
    except EmptySolutionSpace as exc:
        print(f"isse: {exc}", file=sys.stderr)
        return 1
    except (IsseError, OSError) as exc:
        print(f"isse: {exc}", file=sys.stderr)
        return 2

    if outcome.stats is not None:
        log.info("counts per layer: %s", outcome.stats.per_layer_counts)
    try:
        write_report(outcome.rows, args.report, args.out)
        if args.finals is not None:
            args.finals.write_text(json.dumps([solution_to_dict(s) for s in outcome.finals], indent=1))
    except OSError as exc:
        print(f"isse: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
