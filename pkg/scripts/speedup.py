"""Brute force versus ISSEv2 on a fixture small enough to enumerate.

Prints evaluated leaves and booked sequential time for both methods.
Simulation cost is booked, not slept, so the run takes seconds.

    python scripts/speedup.py --scenario mid --per-eval-cost 0.01
"""

import argparse
import time

from isse.pipeline import run_mode
from isse.scenario_io import bundled_scenario, format_duration, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="mid")
    ap.add_argument("--per-eval-cost", type=float, default=0.01)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    scenario = load_scenario(bundled_scenario(args.scenario))

    t0 = time.perf_counter()
    brute = run_mode(scenario, "brute", per_eval_cost=args.per_eval_cost)
    wall = time.perf_counter() - t0
    n = brute.stats.estimated_bruteforce_count
    print(f"brute   leaves {n:>8,}  booked {format_duration(brute.stats.t_max):>12}  wall {wall:.1f}s")

    for seed in range(args.seeds):
        t0 = time.perf_counter()
        out = run_mode(scenario, "issev2", seed=seed, per_eval_cost=args.per_eval_cost)
        wall = time.perf_counter() - t0
        leaves = out.stats.per_layer_counts[-1]
        print(f"issev2  leaves {leaves:>8,}  booked {format_duration(out.stats.t_max):>12}  "
              f"wall {wall:.1f}s  seed {seed}  leaf ratio {leaves / n:.3%}  "
              f"time ratio {brute.stats.t_max / out.stats.t_max:.0f}x")


if __name__ == "__main__":
    main()
