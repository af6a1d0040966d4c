from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import chain, layout, makespan_oracle, module, random_model, scenario
from isse.cpps import SPEED, ParameterSet
from isse.des import WS_PER_KWH, SimModel, Station, StepModel, build_model, evaluate, simulate
from isse.errors import InconsistentSolution


def speeds(*values):
    return ParameterSet(tuple(((SPEED, v),) for v in values))


def one_step_scenario(quantity=1, **kw):
    return scenario([], ["op0"], width=2, height=2, quantity=quantity, **kw)


def _module(mid):
    return module(mid, "op0", "op1")


def test_build_model_effective_duration():
    cfg, lay = chain("A", duration=10.0), layout(2, 2, A=(0, 0))
    scn = scenario([_module("A")], ["op0"])
    assert build_model(cfg, lay, speeds(1.0), scn).steps[0].duration == 10.0
    assert build_model(cfg, lay, speeds(2.0), scn).steps[0].duration == 5.0


def test_build_model_rejects_inconsistent_solutions():
    cfg = chain("A", "B")
    scn = scenario([_module("A"), _module("B")], ["op0", "op1"])
    with pytest.raises(InconsistentSolution):
        build_model(cfg, layout(2, 2, A=(0, 0)), speeds(1.0, 1.0), scn)
    with pytest.raises(InconsistentSolution):
        build_model(cfg, layout(2, 2, A=(0, 0), B=(1, 0)), speeds(1.0), scn)
    with pytest.raises(InconsistentSolution):
        build_model(cfg, layout(2, 2, A=(0, 0), B=(1, 0)), speeds(1.0, 0.0), scn)


def station_model(durations, stations, cells, quantity=1, unit=0.0, power=1000.0, standby=0.0):
    sts = tuple(Station(f"S{i}", c, standby) for i, c in enumerate(cells))
    steps = tuple(StepModel(s, d, power, 36.0) for d, s in zip(durations, stations))
    return SimModel(sts, steps, quantity, unit)


def test_single_part_single_step():
    res = simulate(station_model([10.0], [0], [(0, 0)], power=1800.0))
    assert res.makespan == 10.0
    assert res.energy == pytest.approx(1800.0 * 10.0 / WS_PER_KWH)
    assert res.cost == pytest.approx(36.0 * 10.0 / 3600)


def test_two_parts_serialize_on_one_station():
    assert simulate(station_model([10.0], [0], [(0, 0)], quantity=2)).makespan == 20.0


def test_transport_between_distant_modules():
    res = simulate(station_model([5.0, 5.0], [0, 1], [(0, 0), (1, 2)], unit=2.0))
    assert res.makespan == 16.0


def test_standby_energy_counts_idle_time():
    res = simulate(station_model([5.0, 5.0], [0, 1], [(0, 0), (1, 2)], unit=2.0, power=0.0, standby=360.0))
    # each station idles 11 s of the 16 s makespan
    assert res.idle == (11.0, 11.0)
    assert res.energy == pytest.approx(2 * 360.0 * 11.0 / WS_PER_KWH)


def test_evaluate_matches_simulate(tiny):
    from isse.cpps import generate_configurations, identity_layout, parameter_space
    cfg = generate_configurations(tiny)[0]
    lay = identity_layout(cfg, tiny)
    params = parameter_space(cfg).initial()
    assert evaluate(cfg, lay, params, tiny) == simulate(build_model(cfg, lay, params, tiny))


def lower_bound(model):
    path = sum(s.duration for s in model.steps) + sum(
        model.transport_time(a.station, b.station) for a, b in zip(model.steps, model.steps[1:]))
    load = max(sum(s.duration for s in model.steps if s.station == i) * model.quantity
               for i in range(len(model.stations)))
    return max(path, load)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_makespan_matches_recurrence_oracle(seed):
    model = random_model(np.random.default_rng(seed))
    assert simulate(model).makespan == pytest.approx(makespan_oracle(model))


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_lower_bound_and_conservation(seed):
    model = random_model(np.random.default_rng(seed))
    res = simulate(model)
    assert res.makespan >= lower_bound(model) - 1e-9
    assert res.completed == model.quantity
    for b, i in zip(res.busy, res.idle):
        assert i >= -1e-9
        assert b + i == pytest.approx(res.makespan)
    assert min(res.cost, res.energy) >= 0


@settings(max_examples=300, deadline=None)
@given(seeds, st.floats(1.0, 3.0))
def test_speeding_up_never_delays(seed, factor):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    ups = rng.uniform(1.0, factor, size=len(model.steps))
    faster = replace(model, steps=tuple(replace(s, duration=s.duration / u) for s, u in zip(model.steps, ups)))
    assert simulate(faster).makespan <= simulate(model).makespan + 1e-9


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_bit_identical_reruns(seed):
    model = random_model(np.random.default_rng(seed))
    assert simulate(model) == simulate(model)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_swapping_two_stations_keeps_makespan(seed):
    model = random_model(np.random.default_rng(seed), max_stations=2)
    if len(model.stations) < 2:
        return
    a, b = model.stations
    swapped = replace(model, stations=(replace(a, cell=b.cell), replace(b, cell=a.cell)))
    assert simulate(swapped).makespan == simulate(model).makespan
