"""How the no-go filter and the layout top-k change counts and solution quality.

For each setting this prints per-layer counts, booked time and the best
scalarized objective among the final solutions, which shows the price of
filtering early: fewer evaluations, possibly a worse best solution.

    python scripts/filter_tradeoff.py --scenario tiny
"""

import argparse
import itertools

from isse.metaheuristics import scalarize
from isse.pipeline import run_mode
from isse.scenario_io import bundled_scenario, format_duration, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="tiny")
    ap.add_argument("--per-eval-cost", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    scenario = load_scenario(bundled_scenario(args.scenario))

    print(f"{'nogo':<5} {'top-k':<6} {'counts':<22} {'booked':>10} {'best':>8}")
    for nogo, top_k in itertools.product((False, True), (None, 1, 2, 3, 5)):
        mode = "issev1" if top_k is None else "issev2"
        try:
            out = run_mode(scenario, mode, seed=args.seed, top_k=top_k, nogo=nogo,
                           per_eval_cost=args.per_eval_cost)
        except Exception as exc:
            print(f"{nogo!s:<5} {top_k or 'all'!s:<6} {type(exc).__name__}")
            continue
        best = min(scalarize(s.result, scenario.weights) for s in out.finals)
        print(f"{nogo!s:<5} {top_k or 'all'!s:<6} {str(out.stats.per_layer_counts):<22} "
              f"{format_duration(out.stats.t_max):>10} {best:>8.4f}")


if __name__ == "__main__":
    main()
