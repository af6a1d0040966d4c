"""Deterministic discrete-event simulation of a production order.

Flow-shop semantics: all parts are released at time zero and visit the
order's steps in sequence. Each station serves one part at a time. Moving between stations takes the Manhattan distance times
the unit transport time; transport capacity is unlimited.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from .cpps import GridLayout, ParameterSet, Scenario, SystemConfiguration, manhattan
from .errors import InconsistentSolution

WS_PER_KWH = 3_600_000.0
_ARRIVE, _FINISH = 0, 1


@dataclass(frozen=True)
class Station:
    module: str
    cell: tuple[int, int]
    standby_power: float


@dataclass(frozen=True)
class StepModel:
    station: int
    duration: float
    processing_power: float
    cost_rate: float


@dataclass(frozen=True)
class SimModel:
    stations: tuple[Station, ...]
    steps: tuple[StepModel, ...]
    quantity: int
    transport_unit_time: float = 0.0
    energy_price: float = 0.0

    def transport_time(self, a: int, b: int) -> float:
        return manhattan(self.stations[a].cell, self.stations[b].cell) * self.transport_unit_time


@dataclass(frozen=True)
class SimResult:
    makespan: float
    cost: float
    energy: float
    busy: tuple[float, ...] = ()
    idle: tuple[float, ...] = ()
    completed: int = 0


def build_model(config: SystemConfiguration, layout: GridLayout, params: ParameterSet,
                scenario: Scenario) -> SimModel:
    cells = layout.as_dict()
    modules = config.module_set
    missing = [m for m in modules if m not in cells]
    if missing:
        raise InconsistentSolution(f"layout does not place module(s) {missing}")
    if len(params.steps) != len(config.assignments):
        raise InconsistentSolution(
            f"{len(params.steps)} parameter sets for {len(config.assignments)} steps")
    index = {m: i for i, m in enumerate(modules)}
    stations = tuple(Station(m, cells[m], scenario.module(m).standby_power) for m in modules)
    steps = []
    for i, a in enumerate(config.assignments):
        speed = params.value(i)
        if not speed > 0:
            raise InconsistentSolution(f"step {i}: speed factor must be positive, got {speed}")
        svc = a.service
        steps.append(StepModel(index[a.module], svc.base_duration / speed, svc.processing_power, svc.cost_rate))
    return SimModel(stations, tuple(steps), scenario.order.quantity,
                    scenario.transport_unit_time, scenario.energy_price)


def simulate(model: SimModel) -> SimResult:
    """Run the event loop and collect makespan, cost and energy.

    Every station serves its operations in part-release order. On routes
    that never revisit a station this is plain FIFO; on re-entrant routes
    it keeps the dispatch sequence independent of processing times, so
    speeding up any step can never delay completion.
    """
    n_st, n_steps = len(model.stations), len(model.steps)
    sequence = [[(p, k) for p in range(model.quantity) for k in range(n_steps) if model.steps[k].station == s]
                for s in range(n_st)]
    cursor = [0] * n_st
    arrived: list[set] = [set() for _ in range(n_st)]
    free = [True] * n_st
    busy = [0.0] * n_st
    process_ws = 0.0
    busy_cost = 0.0
    heap: list = []
    seq = 0

    def push(t, kind, part, step):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, part, step))
        seq += 1

    def dispatch(st, t):
        nonlocal process_ws, busy_cost
        if not free[st] or cursor[st] == len(sequence[st]):
            return
        op = sequence[st][cursor[st]]
        if op not in arrived[st]:
            return
        arrived[st].discard(op)
        cursor[st] += 1
        spec = model.steps[op[1]]
        free[st] = False
        busy[st] += spec.duration
        process_ws += spec.duration * spec.processing_power
        busy_cost += spec.duration * spec.cost_rate / 3600.0
        push(t + spec.duration, _FINISH, *op)

    for part in range(model.quantity):
        push(0.0, _ARRIVE, part, 0)

    makespan = 0.0
    completed = 0
    while heap:
        t, _, kind, part, step = heapq.heappop(heap)
        st = model.steps[step].station
        if kind == _ARRIVE:
            arrived[st].add((part, step))
            dispatch(st, t)
            continue
        free[st] = True
        if step + 1 == n_steps:
            completed += 1
            makespan = max(makespan, t)
        else:
            nxt = model.steps[step + 1].station
            push(t + model.transport_time(st, nxt), _ARRIVE, part, step + 1)
        dispatch(st, t)

    idle = tuple(makespan - b for b in busy)
    standby_ws = sum(s.standby_power * i for s, i in zip(model.stations, idle))
    energy = (process_ws + standby_ws) / WS_PER_KWH
    cost = busy_cost + model.energy_price * energy
    return SimResult(makespan, cost, energy, tuple(busy), idle, completed)


def evaluate(config: SystemConfiguration, layout: GridLayout, params: ParameterSet, scenario: Scenario,
             eval_cost: float = 0.0, sleep: bool = False) -> SimResult:
    """Build and run the simulation model of one complete solution.

    With ``sleep`` the call also blocks for ``eval_cost`` seconds to mimic
    an expensive external simulator; callers that only want to account
    the cost should leave ``sleep`` off and book it themselves.
    """
    result = simulate(build_model(config, layout, params, scenario))
    if sleep and eval_cost > 0:
        time.sleep(eval_cost)
    return result
