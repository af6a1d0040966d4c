"""Layered solution-space exploration.

A problem is split vertically into an ordered list of layers. Each layer
owns a generator that refines one partial solution of the previous layer
into a finite list of candidates, plus filter rules on three levels:

1. no-go rules (optional) drop unwanted candidates early,
2. feasibility rules (mandatory) keep only functionally valid ones,
3. ranking rules (optional) sort by a score and keep the best ``k``.

Every surviving candidate opens an independent sub-space for the next
layer, so the search forms a tree whose last-layer leaves are the complete
solutions. Sub-spaces share no state, which is what allows them to be
expanded concurrently without changing the result.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EmptySolutionSpace, InvalidLayerSpec, SpaceTooLarge

DEFAULT_BRUTEFORCE_CAP = 10**7
SATURATED_COUNT = 2**63 - 1


class FilterLevel(IntEnum):
    NOGO = 1
    FEASIBILITY = 2
    RANKING = 3


@dataclass(frozen=True)
class FilterRule:
    """One filter rule.

    Levels 1 and 2 carry a boolean ``predicate``; level 3 carries a ``score``
    (lower is better) and a retention count ``k`` (``None`` keeps all).
    """

    level: FilterLevel
    name: str
    predicate: Callable[[Any], bool] | None = None
    score: Callable[[Any], float] | None = None
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "level", FilterLevel(self.level))
        if self.level == FilterLevel.RANKING:
            if self.score is None:
                raise ValueError(f"ranking rule {self.name!r} needs a score function")
            if self.k is not None and self.k < 1:
                raise ValueError(f"ranking rule {self.name!r}: k must be positive or None")
        elif self.predicate is None:
            raise ValueError(f"level-{int(self.level)} rule {self.name!r} needs a predicate")

    @classmethod
    def nogo(cls, name: str, predicate: Callable[[Any], bool]) -> "FilterRule":
        return cls(FilterLevel.NOGO, name, predicate=predicate)

    @classmethod
    def feasibility(cls, name: str, predicate: Callable[[Any], bool]) -> "FilterRule":
        return cls(FilterLevel.FEASIBILITY, name, predicate=predicate)

    @classmethod
    def ranking(cls, name: str, score: Callable[[Any], float], k: int | None = None) -> "FilterRule":
        return cls(FilterLevel.RANKING, name, score=score, k=k)


@dataclass
class Expansion:
    """Everything a generator may use while refining one partial solution.

    ``raw`` is set by the brute-force enumerator: generators that enforce
    level-1/2 rules internally must then emit the unfiltered candidates.
    ``charge`` books synthetic cost (e.g. a simulated per-evaluation delay)
    against the node without actually sleeping.
    """

    context: Any
    rng: np.random.Generator
    path: tuple[int, ...]
    layer: int
    raw: bool = False
    charged: float = 0.0

    def charge(self, seconds: float) -> None:
        self.charged += seconds


Generator = Callable[[Any, Expansion], Sequence[Any]]


@dataclass(frozen=True)
class LayerSpec:
    """One vertical layer.

    ``space_size`` optionally returns, for a scenario context, the number of
    raw candidates a single parent can have in the undivided problem. It is
    only used for brute-force size estimates.
    """

    index: int
    generator: Generator
    filters: tuple[FilterRule, ...] = ()
    integrated_levels: frozenset[int] = frozenset()
    space_size: Callable[[Any], int] | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "integrated_levels", frozenset(int(v) for v in self.integrated_levels))

    def rules(self, level: int) -> list[FilterRule]:
        return [r for r in self.filters if r.level == level]


@dataclass
class ExplorationNode:
    path: tuple[int, ...]  # generator-output index at each level
    layer: int
    payload: Any
    children: list["ExplorationNode"] = field(default_factory=list)
    wall_time: float = 0.0
    rng_stream: int = 0

    def walk(self) -> Iterator["ExplorationNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def shape(self) -> tuple:
        """Nested child counts; equal shapes mean equal tree topology."""
        return tuple(c.shape() for c in self.children)

    def critical_path(self) -> float:
        tail = max((c.critical_path() for c in self.children), default=0.0)
        return self.wall_time + tail


@dataclass
class ExplorationStats:
    """Branching counts and timing of one exploration run.

    ``per_layer_times`` sums the expansion times that produced each layer
    (fully sequential), ``per_layer_max_times`` takes their maximum (one
    worker per sub-space). ``filtered_counts[i][level]`` counts candidates
    removed post-generation at layer ``i``; ``filtered_by_rule`` gives the
    same per rule name.
    """

    generated_counts: list[int] = field(default_factory=list)
    per_layer_counts: list[int] = field(default_factory=list)
    per_layer_times: list[float] = field(default_factory=list)
    per_layer_max_times: list[float] = field(default_factory=list)
    filtered_counts: list[dict[int, int]] = field(default_factory=list)
    filtered_by_rule: list[dict[str, int]] = field(default_factory=list)
    active_levels: list[frozenset[int]] = field(default_factory=list)
    t_min: float = 0.0
    t_max: float = 0.0
    estimated_bruteforce_count: int | None = None
    estimated_bruteforce_time: float | None = None
    estimate_saturated: bool = False

    def _grow(self, layers: Sequence[LayerSpec]) -> None:
        for spec in layers:
            self.generated_counts.append(0)
            self.per_layer_counts.append(0)
            self.per_layer_times.append(0.0)
            self.per_layer_max_times.append(0.0)
            self.filtered_counts.append({1: 0, 2: 0, 3: 0})
            self.filtered_by_rule.append({})
            self.active_levels.append(frozenset({int(r.level) for r in spec.filters}))


class FilterResult(NamedTuple):
    survivors: list
    removed: tuple[int, int, int]
    by_rule: dict[str, int]
    kept: list[int]


class BruteForceEstimate(NamedTuple):
    count: int
    time: float
    saturated: bool


def node_seed(seed: int, path: Sequence[int]) -> int:
    """Stream seed for the node at ``path``; independent of visiting order."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(i) for i in path))
    return int(ss.generate_state(1, np.uint64)[0])


def apply_filters(candidates: Sequence, rules: Sequence[FilterRule],
                  integrated: frozenset[int] | set[int] = frozenset()) -> FilterResult:
    """Apply rules level by level, skipping levels listed in ``integrated``.

    Within a level rules run in declaration order and a candidate is charged
    to the first rule that rejects it. Each ranking rule stable-sorts by its
    score and truncates to its own ``k``. ``kept`` gives the survivors'
    positions in ``candidates``.
    """
    cands = list(candidates)
    kept = list(range(len(cands)))
    removed = {1: 0, 2: 0, 3: 0}
    by_rule: dict[str, int] = {}
    ordered = sorted(rules, key=lambda r: int(r.level))  # stable: keeps declaration order
    for rule in ordered:
        level = int(rule.level)
        if level in integrated:
            continue
        before = len(kept)
        if rule.level == FilterLevel.RANKING:
            scores = {i: rule.score(cands[i]) for i in kept}
            kept = sorted(kept, key=lambda i: scores[i])
            if rule.k is not None:
                kept = kept[: rule.k]
        else:
            kept = [i for i in kept if rule.predicate(cands[i])]
        dropped = before - len(kept)
        removed[level] += dropped
        if dropped:
            by_rule[rule.name] = by_rule.get(rule.name, 0) + dropped
    return FilterResult([cands[i] for i in kept], (removed[1], removed[2], removed[3]), by_rule, kept)


def estimate_bruteforce(factors: Sequence[int], per_eval_cost: float) -> BruteForceEstimate:
    """Size and sequential cost of the undivided problem.

    Counts beyond a signed 64-bit integer are saturated and flagged.
    """
    if any(f < 1 for f in factors):
        raise ValueError("branching factors must be >= 1")
    count = math.prod(int(f) for f in factors)
    saturated = count > SATURATED_COUNT
    if saturated:
        count = SATURATED_COUNT
    cost = float(count) * float(per_eval_cost)
    if math.isinf(cost):
        cost = float(np.finfo(float).max)
        saturated = True
    return BruteForceEstimate(count, cost, saturated)


def validate_layers(layers: Sequence[LayerSpec]) -> None:
    if not layers:
        raise InvalidLayerSpec("at least one layer is required")
    for i, spec in enumerate(layers):
        if not spec.rules(FilterLevel.FEASIBILITY):
            raise InvalidLayerSpec(f"layer {i} ({spec.name or 'unnamed'}) has no level-2 feasibility rule")
        if not spec.integrated_levels <= {1, 2}:
            raise InvalidLayerSpec(f"layer {i}: only levels 1 and 2 can be generator-integrated")


def _space_estimate(layers: Sequence[LayerSpec], context: Any, per_eval_cost: float):
    if any(spec.space_size is None for spec in layers):
        return None
    return estimate_bruteforce([max(1, spec.space_size(context)) for spec in layers], per_eval_cost)


class _Expanded(NamedTuple):
    children: list[ExplorationNode]
    generated: int
    result: FilterResult
    elapsed: float


def _expand(node: ExplorationNode, spec: LayerSpec, context: Any, seed: int) -> _Expanded:
    start = time.perf_counter()
    ex = Expansion(context, np.random.default_rng(node.rng_stream), node.path, spec.index)
    candidates = list(spec.generator(node.payload, ex))
    result = apply_filters(candidates, spec.filters, spec.integrated_levels)
    children = []
    for i, payload in sorted(zip(result.kept, result.survivors), key=lambda kv: kv[0]):
        path = node.path + (i,)
        children.append(ExplorationNode(path, spec.index, payload, rng_stream=node_seed(seed, path)))
    elapsed = time.perf_counter() - start + ex.charged
    return _Expanded(children, len(candidates), result, elapsed)


def explore(layers: Sequence[LayerSpec], root_context: Any, seed: int = 0, parallelism: int = 1,
            per_eval_cost: float = 0.0) -> tuple[list, ExplorationStats, ExplorationNode]:
    """Explore all layers and return ``(finals, stats, tree)``.

    Finals are the last-layer payloads in path order. Payloads, counts and
    tree shape do not depend on ``parallelism``; only timings do.
    """
    validate_layers(layers)
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    stats = ExplorationStats()
    stats._grow(layers)
    root = ExplorationNode((), -1, None, rng_stream=node_seed(seed, ()))
    frontier = [root]
    death: tuple[int, int | None] = (0, None)

    pool = ThreadPoolExecutor(max_workers=parallelism) if parallelism > 1 else None
    try:
        for i, spec in enumerate(layers):
            if pool is None:
                expanded = [_expand(n, spec, root_context, seed) for n in frontier]
            else:
                expanded = list(pool.map(lambda n: _expand(n, spec, root_context, seed), frontier))
            nxt = []
            for node, ex in zip(frontier, expanded):
                node.children = ex.children
                node.wall_time = ex.elapsed
                stats.generated_counts[i] += ex.generated
                stats.per_layer_counts[i] += len(ex.children)
                stats.per_layer_times[i] += ex.elapsed
                stats.per_layer_max_times[i] = max(stats.per_layer_max_times[i], ex.elapsed)
                for level, count in zip((1, 2, 3), ex.result.removed):
                    stats.filtered_counts[i][level] += count
                for name, count in ex.result.by_rule.items():
                    stats.filtered_by_rule[i][name] = stats.filtered_by_rule[i].get(name, 0) + count
                if not ex.children:
                    hit = [lvl for lvl, c in zip((1, 2, 3), ex.result.removed) if c]
                    death = (i, hit[-1] if hit else None)
                nxt.extend(ex.children)
            frontier = nxt
            if not frontier:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    stats.t_max = sum(n.wall_time for n in root.walk())
    stats.t_min = root.critical_path()
    est = _space_estimate(layers, root_context, per_eval_cost)
    if est is not None:
        stats.estimated_bruteforce_count, stats.estimated_bruteforce_time, stats.estimate_saturated = est

    last = len(layers) - 1
    finals = [n.payload for n in frontier if n.layer == last]
    if not finals:
        raise EmptySolutionSpace(*death)
    return finals, stats, root


def explore_bruteforce(layers: Sequence[LayerSpec], root_context: Any, seed: int = 0,
                       cap: int = DEFAULT_BRUTEFORCE_CAP,
                       per_eval_cost: float = 0.0) -> tuple[list, ExplorationStats]:
    """Enumerate the full cross-product of raw generator outputs.

    No filtering happens on the way down; every complete combination is
    checked once against the level-2 rules of all layers along its path.
    This is the ground-truth oracle for :func:`explore`.
    """
    validate_layers(layers)
    est = _space_estimate(layers, root_context, per_eval_cost)
    if est is not None and est.count > cap:
        raise SpaceTooLarge(est.count, cap)

    stats = ExplorationStats()
    stats._grow(layers)
    last = len(layers) - 1
    finals: list = []
    charged = 0.0
    start = time.perf_counter()

    def feasible(chain: list) -> bool:
        for spec, payload in zip(layers, chain):
            for rule in spec.rules(FilterLevel.FEASIBILITY):
                if not rule.predicate(payload):
                    return False
        return True

    def descend(payload: Any, path: tuple[int, ...], chain: list) -> None:
        nonlocal charged
        depth = len(path)
        spec = layers[depth]
        ex = Expansion(root_context, np.random.default_rng(node_seed(seed, path)), path, depth, raw=True)
        candidates = list(spec.generator(payload, ex))
        charged += ex.charged
        stats.generated_counts[depth] += len(candidates)
        if depth == last:
            if stats.generated_counts[depth] > cap:
                raise SpaceTooLarge(stats.generated_counts[depth], cap, exact=False)
            for cand in candidates:
                chain.append(cand)
                if feasible(chain):
                    finals.append(cand)
                chain.pop()
            return
        stats.per_layer_counts[depth] += len(candidates)
        for i, cand in enumerate(candidates):
            chain.append(cand)
            descend(cand, path + (i,), chain)
            chain.pop()

    descend(None, (), [])
    n = stats.generated_counts[last]
    stats.per_layer_counts[last] = len(finals)
    stats.filtered_counts[last][2] = n - len(finals)
    total = time.perf_counter() - start + charged
    stats.per_layer_times[last] = stats.per_layer_max_times[last] = total
    stats.t_min = stats.t_max = total
    stats.estimated_bruteforce_count = n
    stats.estimated_bruteforce_time = n * per_eval_cost
    return finals, stats
