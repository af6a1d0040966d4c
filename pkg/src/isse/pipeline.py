"""Three-layer exploration of the reconfiguration use case.

Layer 0 assigns order steps to modules, layer 1 places the used modules
on the grid, layer 2 tunes production parameters against the simulator.
Each layer refines a :class:`Solution` by filling in one more field.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import cpps
from .core import (DEFAULT_BRUTEFORCE_CAP, ExplorationNode, ExplorationStats, FilterRule, LayerSpec,
                   estimate_bruteforce, explore, explore_bruteforce)
from .cpps import GridLayout, ParameterSet, Scenario, SystemConfiguration
from .des import SimResult, evaluate
from .errors import NoFeasibleConfiguration, SpaceTooLarge
from .metaheuristics import sa_optimize, scalarize
from .scenario_io import ReportRow, bruteforce_row, row_from_stats

MODES = ("brute", "issev1", "issev2")
ROW_NAMES = {"brute": "BruteForce", "issev1": "ISSEv1", "issev2": "ISSEv2"}


@dataclass(frozen=True)
class Solution:
    config: SystemConfiguration
    layout: GridLayout | None = None
    params: ParameterSet | None = None
    result: SimResult | None = None

    def key(self) -> tuple:
        return self.config, self.layout, self.params


class _Evaluator:
    """Memoized simulator calls that book the synthetic per-call cost."""

    def __init__(self, sol: Solution, scenario: Scenario, ex, per_eval_cost: float, sleep: bool):
        self.sol, self.scenario, self.ex = sol, scenario, ex
        self.cost, self.sleep = per_eval_cost, sleep
        self.cache: dict[ParameterSet, SimResult] = {}

    def __call__(self, params: ParameterSet) -> SimResult:
        hit = self.cache.get(params)
        if hit is None:
            hit = evaluate(self.sol.config, self.sol.layout, params, self.scenario, self.cost, self.sleep)
            if not self.sleep:
                self.ex.charge(self.cost)
            self.cache[params] = hit
        return hit


def build_layers(scenario: Scenario, mode: str, *, top_k: int | None = None, nogo: bool = True,
                 ranking: bool = True, per_eval_cost: float = 0.0, sleep: bool = False) -> list[LayerSpec]:
    """Layer specs for one of the compared exploration methods.

    ``nogo`` toggles the standby-power rule (level 1) and ``ranking`` the
    level-3 selection: GA top-k layouts in ``issev2`` and annealed
    parameters in both ISSE modes. With ranking off, layouts and parameter
    grids are enumerated exhaustively. ``brute`` always enumerates.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "brute":
        nogo, ranking = False, False
    weights = scenario.weights
    k = top_k if top_k is not None else scenario.ga.top_k
    ga_cfg = replace(scenario.ga, top_k=k)
    max_modules = min(len(scenario.order.steps), len(scenario.modules))

    def configurations(parent, ex):
        scn = ex.context
        if ex.raw:
            return [Solution(c) for c in cpps.raw_configurations(scn)]
        try:
            return [Solution(c) for c in cpps.generate_configurations(scn, nogo=nogo)]
        except NoFeasibleConfiguration:
            # a step nobody admissible can serve leaves this layer empty
            return []

    layer0_rules = [
        FilterRule.feasibility("service-match", lambda s: cpps.matches_order(s.config, scenario.order)),
        FilterRule.feasibility("machine-config-consistency", lambda s: cpps.is_consistent(s.config)),
    ]
    if nogo:
        layer0_rules.insert(0, FilterRule.nogo("standby-power", lambda s: cpps.passes_standby(s.config, scenario)))

    def layouts_all(parent, ex):
        return [replace(parent, layout=lay) for lay in cpps.layout_bruteforce(parent.config, ex.context)]

    def layouts_ga(parent, ex):
        res = cpps.layout_ga(parent.config, ex.context, ex.rng, ga_cfg)
        return [replace(parent, layout=lay) for lay in res.variants]

    use_ga = mode == "issev2" and ranking
    layer1_rules = [FilterRule.feasibility(
        "complete-placement", lambda s: cpps.is_complete_layout(s.layout, s.config, scenario))]
    if use_ga:
        layer1_rules.append(FilterRule.ranking(
            "layout-fitness", lambda s: cpps.layout_fitness(s.layout, s.config, scenario), k))

    def params_annealed(parent, ex):
        space = cpps.parameter_space(parent.config)
        sim = _Evaluator(parent, ex.context, ex, per_eval_cost, sleep)
        res = sa_optimize(lambda p: scalarize(sim(p), weights), space.neighbor, space.feasible,
                          space.initial(), ex.context.sa, ex.rng)
        return [replace(parent, params=res.best, result=sim(res.best))]

    def params_grid(parent, ex):
        space = cpps.parameter_space(parent.config)
        sim = _Evaluator(parent, ex.context, ex, per_eval_cost, sleep)
        return [replace(parent, params=p, result=sim(p)) for p in space.grid(ex.context.param_grid_levels)]

    layer2_rules = [FilterRule.feasibility(
        "parameter-bounds", lambda s: cpps.parameter_space(s.config).feasible(s.params))]
    if ranking:
        layer2_rules.append(FilterRule.ranking("scalarized-objective", lambda s: scalarize(s.result, weights), 1))

    return [
        LayerSpec(0, configurations, tuple(layer0_rules), frozenset({1, 2}),
                  space_size=cpps.raw_configuration_count, name="configurations"),
        LayerSpec(1, layouts_ga if use_ga else layouts_all, tuple(layer1_rules), frozenset({2}),
                  space_size=lambda scn: cpps.layout_count(max_modules, scn.grid_width * scn.grid_height),
                  name="layouts"),
        LayerSpec(2, params_annealed if ranking else params_grid, tuple(layer2_rules),
                  space_size=lambda scn: scn.param_grid_levels ** len(scn.order.steps),
                  name="parameters"),
    ]


@dataclass
class RunOutcome:
    mode: str
    finals: list
    stats: ExplorationStats | None
    tree: ExplorationNode | None
    rows: list[ReportRow]


def run_mode(scenario: Scenario, mode: str, *, seed: int = 0, parallel: int = 1, top_k: int | None = None,
             per_eval_cost: float = 0.0, sleep: bool = False, nogo: bool = True, ranking: bool = True,
             cap: int = DEFAULT_BRUTEFORCE_CAP) -> RunOutcome:
    """Run one method and build its report rows.

    ISSE runs report their own row plus the estimated brute-force row for
    comparison. A brute-force run over ``cap`` yields only the estimate.
    Raises :class:`~isse.errors.EmptySolutionSpace` if nothing survives.
    """
    layers = build_layers(scenario, mode, top_k=top_k, nogo=nogo, ranking=ranking,
                          per_eval_cost=per_eval_cost, sleep=sleep)
    if mode == "brute":
        try:
            finals, stats = explore_bruteforce(layers, scenario, seed=seed, cap=cap, per_eval_cost=per_eval_cost)
        except SpaceTooLarge:
            est = estimate_bruteforce([spec.space_size(scenario) for spec in layers], per_eval_cost)
            return RunOutcome(mode, [], None, None, [bruteforce_row(est.count, est.time, True, est.saturated)])
        row = bruteforce_row(stats.estimated_bruteforce_count, stats.t_max, estimated=False)
        return RunOutcome(mode, finals, stats, None, [row])

    finals, stats, tree = explore(layers, scenario, seed=seed, parallelism=parallel, per_eval_cost=per_eval_cost)
    rows = [bruteforce_row(stats.estimated_bruteforce_count, stats.estimated_bruteforce_time, True,
                           stats.estimate_saturated),
            row_from_stats(ROW_NAMES[mode], stats)]
    return RunOutcome(mode, finals, stats, tree, rows)
