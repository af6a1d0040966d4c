"""Reconfigurable production system: modules, configurations, layouts.

A production order is a sequence of service kinds. Each module (CPPM)
offers services through one of several machine-level configurations, and
a system configuration assigns every order step to one module, machine
configuration and service. Modules occupy one cell of a rectangular grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (GridTooSmall, MissingCurrentLayout, NoFeasibleConfiguration,
                     UnplacedModule)
from .metaheuristics import GaConfig, ObjectiveWeights, SaConfig, ga_optimize

LAYOUT_OBJECTIVES = ("transport", "reconfiguration", "compromise")
LAYOUT_MODES = ("GA", "BruteForce")
SPEED = "speed_factor"
NEIGHBOR_STEP = 0.1

Cell = tuple[int, int]


@dataclass(frozen=True)
class Service:
    kind: str
    base_duration: float
    processing_power: float
    cost_rate: float
    parameter_bounds: tuple[tuple[str, float, float], ...] = ((SPEED, 0.5, 1.5),)

    def bounds(self, name: str) -> tuple[float, float]:
        for pname, lo, hi in self.parameter_bounds:
            if pname == name:
                return lo, hi
        raise KeyError(name)


@dataclass(frozen=True)
class MachineConfig:
    name: str
    services: tuple[Service, ...]


@dataclass(frozen=True)
class Cppm:
    id: str
    machine_configs: tuple[MachineConfig, ...]
    standby_power: float = 0.0


@dataclass(frozen=True)
class ProductionOrder:
    steps: tuple[str, ...]
    quantity: int = 1


@dataclass(frozen=True)
class Assignment:
    module: str
    machine_config: str
    service: Service


@dataclass(frozen=True)
class SystemConfiguration:
    assignments: tuple[Assignment, ...]

    @property
    def module_set(self) -> tuple[str, ...]:
        return tuple(sorted({a.module for a in self.assignments}))

    def label(self) -> str:
        return " > ".join(f"{a.module}/{a.machine_config}:{a.service.kind}" for a in self.assignments)


@dataclass(frozen=True)
class GridLayout:
    width: int
    height: int
    placement: tuple[tuple[str, Cell], ...]

    @classmethod
    def from_mapping(cls, width: int, height: int, mapping: dict[str, Cell]) -> "GridLayout":
        return cls(width, height, tuple(sorted((m, (int(c[0]), int(c[1]))) for m, c in mapping.items())))

    def as_dict(self) -> dict[str, Cell]:
        return dict(self.placement)

    def cell(self, module: str) -> Cell:
        for m, c in self.placement:
            if m == module:
                return c
        raise UnplacedModule(module)

    def is_valid(self) -> bool:
        cells = [c for _, c in self.placement]
        in_range = all(0 <= x < self.width and 0 <= y < self.height for x, y in cells)
        modules = [m for m, _ in self.placement]
        return in_range and len(set(cells)) == len(cells) and len(set(modules)) == len(modules)


@dataclass(frozen=True)
class ParameterSet:
    """Per order step, the sorted ``(name, value)`` pairs of its parameters."""

    steps: tuple[tuple[tuple[str, float], ...], ...]

    def value(self, step: int, name: str = SPEED) -> float:
        return dict(self.steps[step])[name]

    def speed_factors(self) -> tuple[float, ...]:
        return tuple(self.value(i) for i in range(len(self.steps)))


@dataclass(frozen=True)
class Scenario:
    modules: tuple[Cppm, ...]
    order: ProductionOrder
    grid_width: int
    grid_height: int
    current_layout: GridLayout | None = None
    standby_module_threshold: float | None = None
    standby_config_threshold: float | None = None
    layout_mode: str = "GA"
    layout_objective: str = "transport"
    alpha: float = 0.5
    ga: GaConfig = field(default_factory=GaConfig)
    sa: SaConfig = field(default_factory=SaConfig)
    param_grid_levels: int = 3
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    transport_unit_time: float = 1.0
    energy_price: float = 0.0
    name: str = ""

    def module(self, module_id: str) -> Cppm:
        for m in self.modules:
            if m.id == module_id:
                return m
        raise KeyError(module_id)

    @property
    def cells(self) -> list[Cell]:
        return [(x, y) for x in range(self.grid_width) for y in range(self.grid_height)]


# -- layer 1: configurations -------------------------------------------------

def step_options(scenario: Scenario, kind: str, modules=None) -> list[Assignment]:
    """All (module, machine config, service) triples able to perform ``kind``."""
    out = []
    for mod in scenario.modules if modules is None else modules:
        for mc in mod.machine_configs:
            for svc in mc.services:
                if svc.kind == kind:
                    out.append(Assignment(mod.id, mc.name, svc))
    return out


def is_consistent(config: SystemConfiguration) -> bool:
    """Each used module runs exactly one machine configuration."""
    chosen: dict[str, str] = {}
    for a in config.assignments:
        if chosen.setdefault(a.module, a.machine_config) != a.machine_config:
            return False
    return True


def matches_order(config: SystemConfiguration, order: ProductionOrder) -> bool:
    return (len(config.assignments) == len(order.steps)
            and all(a.service.kind == k for a, k in zip(config.assignments, order.steps)))


def standby_power(config: SystemConfiguration, scenario: Scenario) -> float:
    return sum(scenario.module(m).standby_power for m in config.module_set)


def passes_standby(config: SystemConfiguration, scenario: Scenario) -> bool:
    mod_t, cfg_t = scenario.standby_module_threshold, scenario.standby_config_threshold
    if mod_t is not None and any(scenario.module(m).standby_power > mod_t for m in config.module_set):
        return False
    return cfg_t is None or standby_power(config, scenario) <= cfg_t


def raw_configurations(scenario: Scenario) -> list[SystemConfiguration]:
    """Cross product of per-step options, with no filtering at all."""
    options = [step_options(scenario, kind) for kind in scenario.order.steps]
    return [SystemConfiguration(tuple(combo)) for combo in itertools.product(*options)]


def raw_configuration_count(scenario: Scenario) -> int:
    return math.prod(len(step_options(scenario, kind)) for kind in scenario.order.steps)


def generate_configurations(scenario: Scenario, nogo: bool = True) -> list[SystemConfiguration]:
    """Enumerate every consistent configuration for the production order.

    The standby-power no-go thresholds (when ``nogo``) and machine-config
    consistency are enforced during enumeration, so excluded partial
    assignments are never extended. Order is lexicographic in the per-step
    option index.
    """
    modules = list(scenario.modules)
    mod_t = scenario.standby_module_threshold if nogo else None
    cfg_t = scenario.standby_config_threshold if nogo else None
    if mod_t is not None:
        modules = [m for m in modules if m.standby_power <= mod_t]
    options = []
    for i, kind in enumerate(scenario.order.steps):
        opts = step_options(scenario, kind, modules)
        if not opts:
            raise NoFeasibleConfiguration(i, kind)
        options.append(opts)
    standby = {m.id: m.standby_power for m in scenario.modules}

    out: list[SystemConfiguration] = []
    chosen: dict[str, str] = {}
    picked: list[Assignment] = []

    def extend(step: int, power: float) -> None:
        if step == len(options):
            out.append(SystemConfiguration(tuple(picked)))
            return
        for opt in options[step]:
            prev = chosen.get(opt.module)
            if prev is not None and prev != opt.machine_config:
                continue
            extra = 0.0 if prev is not None else standby[opt.module]
            if cfg_t is not None and power + extra > cfg_t:
                continue
            picked.append(opt)
            if prev is None:
                chosen[opt.module] = opt.machine_config
            extend(step + 1, power + extra)
            if prev is None:
                del chosen[opt.module]
            picked.pop()

    extend(0, 0.0)
    return out


# -- layer 2: layouts ----------------------------------------------------------

def layout_bruteforce(config: SystemConfiguration, scenario: Scenario) -> list[GridLayout]:
    """All injective placements of the configuration's modules on the grid."""
    modules = config.module_set
    cells = scenario.cells
    if len(modules) > len(cells):
        raise GridTooSmall(len(modules), len(cells))
    w, h = scenario.grid_width, scenario.grid_height
    return [GridLayout(w, h, tuple(zip(modules, combo))) for combo in itertools.permutations(cells, len(modules))]


def layout_count(modules: int, cells: int) -> int:
    return math.perm(cells, modules) if modules <= cells else 0


def is_complete_layout(layout: GridLayout, config: SystemConfiguration, scenario: Scenario) -> bool:
    return (layout.is_valid()
            and (layout.width, layout.height) == (scenario.grid_width, scenario.grid_height)
            and tuple(m for m, _ in layout.placement) == config.module_set)


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def transport_effort(layout: GridLayout, config: SystemConfiguration, order: ProductionOrder | None = None) -> float:
    """Total Manhattan distance a part travels along the order's steps."""
    if order is not None and len(order.steps) != len(config.assignments):
        raise ValueError("configuration does not cover the production order")
    cells = layout.as_dict()
    path = []
    for a in config.assignments:
        if a.module not in cells:
            raise UnplacedModule(a.module)
        path.append(cells[a.module])
    return float(sum(manhattan(p, q) for p, q in zip(path, path[1:])))


def reconfiguration_effort(layout: GridLayout, current: GridLayout | None) -> int:
    """Modules moved plus modules newly installed; removals are free."""
    if current is None:
        raise MissingCurrentLayout("reconfiguration effort needs a current layout")
    now = current.as_dict()
    return sum(1 for m, c in layout.placement if now.get(m) != c)


def identity_layout(config: SystemConfiguration, scenario: Scenario) -> GridLayout:
    """First layout in enumeration order: modules on the first cells."""
    modules = config.module_set
    cells = scenario.cells
    if len(modules) > len(cells):
        raise GridTooSmall(len(modules), len(cells))
    return GridLayout(scenario.grid_width, scenario.grid_height, tuple(zip(modules, cells)))


def _baseline(config: SystemConfiguration, scenario: Scenario) -> GridLayout:
    cur = scenario.current_layout
    if cur is not None and set(config.module_set) <= set(cur.as_dict()):
        return GridLayout(cur.width, cur.height, tuple((m, cur.cell(m)) for m in config.module_set))
    return identity_layout(config, scenario)


def layout_fitness(layout: GridLayout, config: SystemConfiguration, scenario: Scenario) -> float:
    """Layout score per the scenario's objective, lower is better.

    The compromise objective mixes both efforts, each divided by its value
    on a baseline layout (the current one when it places every module,
    else the identity layout; a zero baseline counts as 1). At ``alpha``
    1 or 0 it collapses to the plain single effort.
    """
    objective, alpha = scenario.layout_objective, scenario.alpha
    if objective == "compromise":
        if alpha == 1.0:
            objective = "transport"
        elif alpha == 0.0:
            objective = "reconfiguration"
    if objective == "transport":
        return transport_effort(layout, config)
    if objective == "reconfiguration":
        return float(reconfiguration_effort(layout, scenario.current_layout))
    base = _baseline(config, scenario)
    t0 = transport_effort(base, config) or 1.0
    r0 = reconfiguration_effort(base, scenario.current_layout) or 1.0
    return (alpha * transport_effort(layout, config) / t0
            + (1 - alpha) * reconfiguration_effort(layout, scenario.current_layout) / r0)


def order_crossover(a, b, rng: np.random.Generator) -> tuple[int, ...]:
    """OX1: keep a slice of ``a``, fill the rest in ``b``'s order."""
    n = len(a)
    i, j = sorted(int(v) for v in rng.choice(n + 1, size=2, replace=False))
    child = [None] * n
    child[i:j] = a[i:j]
    kept = set(a[i:j])
    fill = iter(g for g in b if g not in kept)
    for k in range(n):
        if child[k] is None:
            child[k] = next(fill)
    return tuple(child)


def layout_ga(config: SystemConfiguration, scenario: Scenario, rng: np.random.Generator,
              ga: GaConfig | None = None):
    """Best distinct layouts found by the GA, best first.

    Genomes are permutations of cell indices; module ``i`` of the sorted
    module set sits on cell ``genome[i]``. Order crossover and swap
    mutation keep placements injective, so every offspring is feasible.
    Returns the :class:`GaResult`; ``.variants`` holds the layouts.
    """
    ga = ga or scenario.ga
    modules = config.module_set
    cells = scenario.cells
    if len(modules) > len(cells):
        raise GridTooSmall(len(modules), len(cells))
    index = {c: i for i, c in enumerate(cells)}
    w, h, m = scenario.grid_width, scenario.grid_height, len(modules)

    def decode(genome) -> GridLayout:
        return GridLayout(w, h, tuple((mod, cells[g]) for mod, g in zip(modules, genome)))

    def encode(layout: GridLayout):
        used = [index[c] for _, c in layout.placement]
        taken = set(used)
        return tuple(used + [i for i in range(len(cells)) if i not in taken])

    def mutate(genome, rng):
        if len(genome) < 2:
            return genome
        g = list(genome)
        i = int(rng.integers(m))
        j = int(rng.integers(len(g) - 1))
        j += j >= i
        g[i], g[j] = g[j], g[i]
        return tuple(g)

    def sample(rng):
        return decode(tuple(int(v) for v in rng.permutation(len(cells))))

    return ga_optimize(
        fitness=lambda lay: layout_fitness(lay, config, scenario),
        encode=encode, decode=decode, crossover=order_crossover, mutate=mutate,
        feasible=lambda lay: is_complete_layout(lay, config, scenario),
        sample=sample, config=ga, rng=rng)


# -- layer 3: production parameters -------------------------------------------

@dataclass(frozen=True)
class ParameterSpace:
    """Feasible production parameters of one configuration.

    Only the speed factor is searched; any other declared parameter stays
    at the midpoint of its interval.
    """

    bounds: tuple[tuple[tuple[str, float, float], ...], ...]

    def initial(self) -> ParameterSet:
        return ParameterSet(tuple(tuple(sorted((n, (lo + hi) / 2) for n, lo, hi in step))
                                  for step in self.bounds))

    def feasible(self, params: ParameterSet) -> bool:
        if len(params.steps) != len(self.bounds):
            return False
        for values, bounds in zip(params.steps, self.bounds):
            vals = dict(values)
            if set(vals) != {n for n, _, _ in bounds}:
                return False
            if any(not lo <= vals[n] <= hi for n, lo, hi in bounds):
                return False
        return True

    def neighbor(self, params: ParameterSet, rng: np.random.Generator) -> ParameterSet:
        step = int(rng.integers(len(self.bounds)))
        lo, hi = next((lo, hi) for n, lo, hi in self.bounds[step] if n == SPEED)
        width = hi - lo
        delta = rng.uniform(-NEIGHBOR_STEP * width, NEIGHBOR_STEP * width)
        vals = dict(params.steps[step])
        vals[SPEED] = min(hi, max(lo, vals[SPEED] + delta))
        steps = list(params.steps)
        steps[step] = tuple(sorted(vals.items()))
        return ParameterSet(tuple(steps))

    def grid(self, levels: int) -> list[ParameterSet]:
        """Every combination of ``levels`` evenly spaced speed factors."""
        mid = self.initial()
        axes = []
        for bounds in self.bounds:
            lo, hi = next((lo, hi) for n, lo, hi in bounds if n == SPEED)
            axes.append([(lo + hi) / 2] if levels == 1 else [float(v) for v in np.linspace(lo, hi, levels)])
        out = []
        for combo in itertools.product(*axes):
            steps = []
            for base, speed in zip(mid.steps, combo):
                vals = dict(base)
                vals[SPEED] = speed
                steps.append(tuple(sorted(vals.items())))
            out.append(ParameterSet(tuple(steps)))
        return out


def parameter_space(config: SystemConfiguration) -> ParameterSpace:
    return ParameterSpace(tuple(a.service.parameter_bounds for a in config.assignments))
