"""Reproduce the structure of the method-comparison table on a fixture.

Runs brute force (estimated), ISSEv1 and ISSEv2 with a booked cost per
simulation run and prints the three rows as a table.

    python scripts/comparison_report.py --scenario combi --per-eval-cost 1
"""

import argparse
from pathlib import Path

from isse.pipeline import run_mode
from isse.scenario_io import bundled_scenario, load_scenario, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="combi", help="bundled fixture name or path")
    ap.add_argument("--per-eval-cost", type=float, default=1.0)
    ap.add_argument("--top-k", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--report", choices=("table", "csv"), default="table")
    args = ap.parse_args()

    path = Path(args.scenario)
    scenario = load_scenario(path if path.exists() else bundled_scenario(args.scenario))
    v1 = run_mode(scenario, "issev1", seed=args.seed, per_eval_cost=args.per_eval_cost)
    v2 = run_mode(scenario, "issev2", seed=args.seed, per_eval_cost=args.per_eval_cost, top_k=args.top_k)
    # both ISSE runs carry the same brute-force estimate as their first row
    write_report([v1.rows[0], v1.rows[1], v2.rows[1]], args.report)


if __name__ == "__main__":
    main()
