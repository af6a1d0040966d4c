import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isse.core import (SATURATED_COUNT, FilterLevel, FilterRule, LayerSpec, apply_filters,
                       estimate_bruteforce, explore, explore_bruteforce, node_seed)
from isse.errors import EmptySolutionSpace, InvalidLayerSpec, SpaceTooLarge

ACCEPT = FilterRule.feasibility("accept", lambda x: True)


def fixed(items):
    return lambda parent, ex: list(items)


def test_apply_filters_level2_rejection():
    res = apply_filters(["x1", "x2", "x3", "x4", "x5"], [FilterRule.feasibility("no-x2", lambda x: x != "x2")])
    assert res.survivors == ["x1", "x3", "x4", "x5"]
    assert res.removed == (0, 1, 0)


def test_apply_filters_ranking_is_stable():
    cands = [("a", 3), ("b", 1), ("c", 4), ("d", 1), ("e", 5)]
    res = apply_filters(cands, [FilterRule.ranking("score", lambda c: c[1], k=2)])
    assert res.survivors == [("b", 1), ("d", 1)]
    assert res.kept == [1, 3]
    assert res.removed == (0, 0, 3)


def test_apply_filters_nogo_rejects_all():
    res = apply_filters(list(range(5)), [FilterRule.nogo("none", lambda x: False), ACCEPT])
    assert res.survivors == []
    assert res.removed == (5, 0, 0)


def test_apply_filters_level_order_and_attribution():
    # declared out of order: level 3 first, level 1 last
    rules = [
        FilterRule.ranking("small", lambda x: x, k=2),
        FilterRule.feasibility("even", lambda x: x % 2 == 0),
        FilterRule.feasibility("not-4", lambda x: x != 4),
        FilterRule.nogo("not-0", lambda x: x != 0),
    ]
    res = apply_filters(list(range(10)), rules)
    assert res.survivors == [2, 6]
    assert res.removed == (1, 6, 1)
    assert res.by_rule == {"not-0": 1, "even": 5, "not-4": 1, "small": 1}


def test_apply_filters_skips_integrated_levels():
    res = apply_filters([1, 2, 3], [FilterRule.feasibility("odd", lambda x: x % 2)], integrated={2})
    assert res.survivors == [1, 2, 3]


def test_sequential_ranking_rules():
    rules = [FilterRule.ranking("by-value", lambda x: x, k=3), FilterRule.ranking("by-neg", lambda x: -x, k=2)]
    assert apply_filters([5, 1, 4, 2, 3], rules).survivors == [3, 2]


def test_filter_rule_validation():
    with pytest.raises(ValueError):
        FilterRule(FilterLevel.RANKING, "r")
    with pytest.raises(ValueError):
        FilterRule(FilterLevel.NOGO, "n")
    with pytest.raises(ValueError):
        FilterRule.ranking("r", lambda x: x, k=0)


def test_explore_single_layer_identity():
    finals, stats, tree = explore([LayerSpec(0, fixed("ABC"), (ACCEPT,))], None)
    assert finals == ["A", "B", "C"]
    assert stats.per_layer_counts == [3]
    assert [c.path for c in tree.children] == [(0,), (1,), (2,)]


def test_explore_two_layers_top1():
    layers = [
        LayerSpec(0, fixed("AB"), (ACCEPT, FilterRule.ranking("prefer-A", lambda p: 0 if p == "A" else 1, k=1))),
        LayerSpec(1, lambda parent, ex: [parent + "1", parent + "2"], (ACCEPT,)),
    ]
    finals, stats, _ = explore(layers, None)
    assert finals == ["A1", "A2"]
    assert stats.per_layer_counts == [1, 2]


def test_paths_use_generator_positions():
    layers = [LayerSpec(0, fixed("ABC"), (FilterRule.feasibility("not-A", lambda p: p != "A"),))]
    _, _, tree = explore(layers, None, seed=3)
    assert [c.path for c in tree.children] == [(1,), (2,)]
    assert tree.children[0].rng_stream == node_seed(3, (1,))


def test_explore_requires_level2():
    with pytest.raises(InvalidLayerSpec):
        explore([LayerSpec(0, fixed("A"), ())], None)
    with pytest.raises(InvalidLayerSpec):
        explore([], None)


def test_integrated_level2_rule_counts_as_present():
    spec = LayerSpec(0, fixed([1, 2]), (FilterRule.feasibility("never", lambda x: False),), {2})
    finals, _, _ = explore([spec], None)
    assert finals == [1, 2]


def test_empty_solution_space_reports_location():
    layers = [
        LayerSpec(0, fixed("AB"), (ACCEPT,)),
        LayerSpec(1, lambda p, ex: [p + "x"], (FilterRule.nogo("never", lambda x: False), ACCEPT)),
    ]
    with pytest.raises(EmptySolutionSpace) as err:
        explore(layers, None)
    assert (err.value.layer, err.value.level) == (1, 1)

    with pytest.raises(EmptySolutionSpace) as err:
        explore([LayerSpec(0, fixed([]), (ACCEPT,))], None)
    assert (err.value.layer, err.value.level) == (0, None)


def test_partially_empty_branch_is_not_an_error():
    layers = [
        LayerSpec(0, fixed("AB"), (ACCEPT,)),
        LayerSpec(1, lambda p, ex: [p + "x"], (FilterRule.feasibility("A-only", lambda x: x[0] == "A"),)),
    ]
    finals, stats, tree = explore(layers, None)
    assert finals == ["Ax"]
    assert stats.filtered_counts[1][2] == 1
    assert tree.children[1].children == []


def test_bruteforce_product():
    layers = [LayerSpec(i, fixed(range(b)), (ACCEPT,), space_size=lambda ctx, b=b: b) for i, b in enumerate((2, 3, 4))]
    finals, stats = explore_bruteforce(layers, None)
    assert len(finals) == 24
    assert stats.estimated_bruteforce_count == 24


def test_bruteforce_cap():
    layers = [LayerSpec(i, fixed(range(b)), (ACCEPT,), space_size=lambda ctx, b=b: b) for i, b in enumerate((2, 3, 4))]
    with pytest.raises(SpaceTooLarge) as err:
        explore_bruteforce(layers, None, cap=10)
    assert err.value.count == 24 and err.value.exact


def test_bruteforce_cap_without_size_hint():
    layers = [LayerSpec(i, fixed(range(b)), (ACCEPT,)) for i, b in enumerate((2, 3, 4))]
    with pytest.raises(SpaceTooLarge) as err:
        explore_bruteforce(layers, None, cap=10)
    assert not err.value.exact


def test_bruteforce_checks_level2_on_whole_path():
    layers = [
        LayerSpec(0, fixed([0, 1, 2]), (FilterRule.feasibility("not-1", lambda x: x != 1),)),
        LayerSpec(1, lambda p, ex: [(p, j) for j in range(2)], (FilterRule.feasibility("j0", lambda x: x[1] == 0),)),
    ]
    finals, stats = explore_bruteforce(layers, None)
    assert finals == [(0, 0), (2, 0)]
    assert stats.generated_counts == [3, 6]


@pytest.mark.parametrize("factors, cost, expected", [
    ([1], 1.0, (1, 1.0)),
    ([10, 10, 10], 0.5, (1000, 500.0)),
    ([1_900_000_000_000], 1.0, (1_900_000_000_000, 1.9e12)),
])
def test_estimate_bruteforce(factors, cost, expected):
    est = estimate_bruteforce(factors, cost)
    assert (est.count, est.time) == expected
    assert not est.saturated


def test_estimate_bruteforce_saturates():
    est = estimate_bruteforce([10**10] * 3, 1.0)
    assert est.saturated and est.count == SATURATED_COUNT
    with pytest.raises(ValueError):
        estimate_bruteforce([0, 3], 1.0)


def test_node_seed_is_pure():
    assert node_seed(7, (1, 2)) == node_seed(7, [1, 2])
    assert node_seed(7, (1, 2)) != node_seed(7, (2, 1))
    assert node_seed(7, ()) != node_seed(8, ())


def test_charged_time_enters_timing():
    def gen(parent, ex):
        ex.charge(2.0)
        return [1, 2]

    layers = [LayerSpec(0, gen, (ACCEPT,)), LayerSpec(1, lambda p, ex: (ex.charge(5.0), [p])[1], (ACCEPT,))]
    _, stats, _ = explore(layers, None)
    assert stats.t_max >= 12.0
    assert 7.0 <= stats.t_min < 12.0
    assert stats.per_layer_times[1] >= 10.0 and stats.per_layer_max_times[1] < 6.0


# -- randomized layered problems ---------------------------------------------

def random_problem(data, n_layers):
    """Random branching with hashed level-2 predicates evaluated on each layer."""
    branching = [data.draw(st.integers(1, 4)) for _ in range(n_layers)]
    salt = data.draw(st.integers(0, 10**6))
    keep = data.draw(st.integers(2, 5))

    def feasible(x):
        return hash((salt, x)) % keep != 0

    def gen(layer):
        def g(parent, ex):
            base = () if parent is None else parent
            # the rng draws make payloads depend on the node stream
            return [base + ((j, int(ex.rng.integers(3))),) for j in range(branching[layer])]
        return g

    def layers(nogo=None, rank_k=None):
        out = []
        for i in range(n_layers):
            rules = [FilterRule.feasibility(f"f{i}", feasible)]
            if nogo is not None:
                rules.append(FilterRule.nogo(f"n{i}", nogo))
            if rank_k is not None:
                rules.append(FilterRule.ranking(f"r{i}", lambda x: x[-1][1], rank_k))
            out.append(LayerSpec(i, gen(i), tuple(rules), space_size=lambda ctx, b=branching[i]: b))
        return out

    return layers, feasible


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(1, 4), st.integers(0, 2**32))
def test_explore_matches_bruteforce_oracle(data, n_layers, seed):
    layers, _ = random_problem(data, n_layers)
    try:
        finals, _, _ = explore(layers(), None, seed=seed)
    except EmptySolutionSpace:
        finals = []
    oracle, _ = explore_bruteforce(layers(), None, seed=seed)
    assert set(finals) == set(oracle)


@settings(max_examples=40, deadline=None)
@given(st.data(), st.integers(1, 4), st.integers(0, 2**32))
def test_filter_invariants(data, n_layers, seed):
    layers, feasible = random_problem(data, n_layers)
    try:
        base = explore(layers(), None, seed=seed)
    except EmptySolutionSpace:
        return
    finals, stats, tree = base
    for node in tree.walk():
        if node.layer >= 0:
            assert feasible(node.payload)
    for i in range(n_layers):
        assert stats.generated_counts[i] == stats.per_layer_counts[i] + sum(stats.filtered_counts[i].values())
    assert stats.t_min <= stats.t_max

    nogo = lambda x: x[-1][1] != 2  # noqa: E731
    for pruned in (layers(nogo=nogo), layers(rank_k=1), layers(nogo=nogo, rank_k=2)):
        try:
            _, pstats, _ = explore(pruned, None, seed=seed)
            counts = pstats.per_layer_counts
        except EmptySolutionSpace:
            continue
        assert all(a <= b for a, b in zip(counts, stats.per_layer_counts))


@settings(max_examples=25, deadline=None)
@given(st.data(), st.integers(1, 4), st.integers(0, 2**32))
def test_parallelism_does_not_change_results(data, n_layers, seed):
    layers, _ = random_problem(data, n_layers)
    results = []
    for workers in (1, 2, 5):
        try:
            finals, stats, tree = explore(layers(), None, seed=seed, parallelism=workers)
        except EmptySolutionSpace as exc:
            results.append(("empty", exc.layer, exc.level))
            continue
        results.append((finals, stats.per_layer_counts, tree.shape()))
    assert results[0] == results[1] == results[2]
