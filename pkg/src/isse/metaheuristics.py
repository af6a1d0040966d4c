"""Genetic algorithm, simulated annealing and weighted-sum scalarization.

Both optimizers are problem-agnostic: encoding, variation operators,
feasibility and objective are injected, and all randomness comes from the
``numpy.random.Generator`` handed in by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

import numpy as np

from .errors import InvalidWeights, NoFeasibleIndividual

MAX_OFFSPRING_RETRIES = 10


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 16
    generations: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float = 0.3
    elitism_count: int = 2
    top_k: int = 3

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 1 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must satisfy 1 <= elitism_count < population_size")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")


@dataclass(frozen=True)
class SaConfig:
    initial_temperature: float = 1.0
    cooling_factor: float = 0.95
    iterations_per_temperature: int = 20
    max_iterations: int = 1000
    min_temperature: float = 1e-6

    def __post_init__(self):
        if self.initial_temperature <= 0 or self.min_temperature <= 0:
            raise ValueError("temperatures must be positive")
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if self.iterations_per_temperature < 1:
            raise ValueError("iterations_per_temperature must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights and reference magnitudes for time, cost and energy."""

    w_time: float = 1 / 3
    w_cost: float = 1 / 3
    w_energy: float = 1 / 3
    ref_time: float = 1.0
    ref_cost: float = 1.0
    ref_energy: float = 1.0

    def __post_init__(self):
        ws = (self.w_time, self.w_cost, self.w_energy)
        if any(w < 0 or not math.isfinite(w) for w in ws) or sum(ws) <= 0:
            raise InvalidWeights(f"weights must be non-negative with positive sum, got {ws}")
        refs = (self.ref_time, self.ref_cost, self.ref_energy)
        if any(not r > 0 for r in refs):
            raise InvalidWeights(f"reference values must be positive, got {refs}")

    def normalized(self) -> tuple[float, float, float]:
        total = self.w_time + self.w_cost + self.w_energy
        return self.w_time / total, self.w_cost / total, self.w_energy / total


def scalarize(result, weights: ObjectiveWeights) -> float:
    """Weighted sum of reference-normalized (time, cost, energy).

    ``result`` needs ``makespan``, ``cost`` and ``energy`` attributes.
    """
    values = (result.makespan, result.cost, result.energy)
    if any(v < 0 for v in values):
        raise ValueError(f"objective values must be non-negative, got {values}")
    wt, wc, we = weights.normalized()
    return (wt * (result.makespan / weights.ref_time)
            + wc * (result.cost / weights.ref_cost)
            + we * (result.energy / weights.ref_energy))


@dataclass
class GaResult:
    variants: list
    fitness: list[float]
    history: list[float] = field(default_factory=list)
    evaluations: int = 0

    @property
    def best(self):
        return self.variants[0]


def ga_optimize(fitness: Callable[[Any], float],
                encode: Callable[[Any], Any],
                decode: Callable[[Any], Hashable],
                crossover: Callable[[Any, Any, np.random.Generator], Any],
                mutate: Callable[[Any, np.random.Generator], Any],
                feasible: Callable[[Any], bool],
                sample: Callable[[np.random.Generator], Any],
                config: GaConfig,
                rng: np.random.Generator) -> GaResult:
    """Minimize ``fitness`` with a generational GA.

    ``sample`` draws a random candidate payload for the initial population.
    Offspring that decode to infeasible payloads are regenerated up to ten
    times, after which a parent is cloned, so every evaluated individual is
    feasible. Every distinct evaluated payload is archived and the best
    ``top_k`` of the archive are returned, ties in first-seen order.
    """
    archive: dict[Hashable, tuple[float, int]] = {}

    def evaluate(payload) -> float:
        hit = archive.get(payload)
        if hit is None:
            hit = (float(fitness(payload)), len(archive))
            archive[payload] = hit
        return hit[0]

    population = []
    for _ in range(config.population_size):
        for _ in range(MAX_OFFSPRING_RETRIES):
            cand = sample(rng)
            if feasible(cand):
                population.append(cand)
                break
    if not population:
        raise NoFeasibleIndividual("could not sample any feasible individual")
    seeds = list(population)
    while len(population) < config.population_size:
        population.append(seeds[len(population) % len(seeds)])

    scores = [evaluate(p) for p in population]
    history = [min(scores)]
    genomes = [encode(p) for p in population]

    def tournament() -> int:
        a, b = rng.integers(len(population), size=2)
        return int(a) if scores[a] <= scores[b] else int(b)

    for _ in range(config.generations - 1):
        ranked = sorted(range(len(population)), key=lambda i: scores[i])
        new_pop = [population[i] for i in ranked[: config.elitism_count]]
        new_gen = [genomes[i] for i in ranked[: config.elitism_count]]
        while len(new_pop) < config.population_size:
            i, j = tournament(), tournament()
            child = None
            for _ in range(MAX_OFFSPRING_RETRIES):
                g = crossover(genomes[i], genomes[j], rng) if rng.random() < config.crossover_rate else genomes[i]
                if rng.random() < config.mutation_rate:
                    g = mutate(g, rng)
                payload = decode(g)
                if feasible(payload):
                    child = (payload, g)
                    break
            if child is None:
                child = (population[i], genomes[i])
            new_pop.append(child[0])
            new_gen.append(child[1])
        population, genomes = new_pop, new_gen
        scores = [evaluate(p) for p in population]
        history.append(min(scores))

    best = sorted(archive.items(), key=lambda kv: kv[1])[: config.top_k]
    return GaResult([p for p, _ in best], [f for _, (f, _) in best], history, len(archive))


def acceptance_probability(delta: float, temperature: float) -> float:
    if delta <= 0:
        return 1.0
    return math.exp(-delta / temperature)


def metropolis_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    if delta <= 0:
        return True
    return bool(rng.random() < math.exp(-delta / temperature))


@dataclass
class SaResult:
    best: Any
    value: float
    proposals: int
    history: list[float] = field(default_factory=list)


def sa_optimize(objective: Callable[[Any], float],
                neighbor: Callable[[Any, np.random.Generator], Any],
                feasible: Callable[[Any], bool],
                initial: Any,
                config: SaConfig,
                rng: np.random.Generator) -> SaResult:
    """Minimize ``objective`` by simulated annealing with geometric cooling.

    Infeasible neighbours are rejected without evaluation but still use up
    a proposal. ``history`` records the best value after each proposal.
    """
    if not feasible(initial):
        raise ValueError("initial solution must be feasible")
    current, current_val = initial, float(objective(initial))
    best, best_val = current, current_val
    history: list[float] = []
    proposals = 0
    temperature = config.initial_temperature
    while proposals < config.max_iterations and temperature >= config.min_temperature:
        for _ in range(config.iterations_per_temperature):
            if proposals >= config.max_iterations:
                break
            cand = neighbor(current, rng)
            proposals += 1
            if feasible(cand):
                val = float(objective(cand))
                if metropolis_accept(val - current_val, temperature, rng):
                    current, current_val = cand, val
                    if val < best_val:
                        best, best_val = cand, val
            history.append(best_val)
        temperature *= config.cooling_factor
    return SaResult(best, best_val, proposals, history)
