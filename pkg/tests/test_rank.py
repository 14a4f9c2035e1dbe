import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expertrank import (
    BadParams,
    DuelOutcome,
    NotIdentifiable,
    SamplingOracle,
    active_ranking,
    best_expert,
    binary_search,
    gen_chain_instance,
    max_search,
    validate_instance,
)
from expertrank.rank import insertion_rank, ranking_delta

from conftest import permuted


def comparator(strength):
    """Deterministic duel from a strength map (higher is better); equal strengths give NULL."""
    calls = []

    def duel(i, x, *_):
        calls.append((i, x))
        if strength[i] > strength[x]:
            return DuelOutcome.FIRST
        if strength[i] < strength[x]:
            return DuelOutcome.SECOND
        return DuelOutcome.NULL

    duel.calls = calls
    return duel


class TestBinarySearch:
    def test_single_element_better(self):
        duel = comparator({"w": 0, "b": 1})
        assert binary_search(0.1, "b", ["w"], 0, 0, duel) == 1

    def test_single_element_worse(self):
        duel = comparator({"w": 0, "b": 1})
        assert binary_search(0.1, "w", ["b"], 0, 0, duel) == 0

    def test_hand_trace(self):
        # 1 is best; the array holds 3 then 2 (worst first)
        duel = comparator({1: 3, 2: 2, 3: 1})
        assert binary_search(0.1, 1, [3, 2], 0, 1, duel) == 2
        assert duel.calls == [(1, 3), (1, 2)]

    def test_empty_range(self):
        assert binary_search(0.1, 0, [], 0, -1, comparator({})) == 0

    def test_null_stops_at_mid(self):
        duel = comparator({0: 0, 1: 1, 2: 1, 3: 2})
        assert binary_search(0.1, 2, [0, 1, 3], 0, 2, duel) == 1

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 1000), min_size=1, max_size=30, unique=True), st.integers(-1, 1001))
    def test_matches_bisect(self, values, new):
        import bisect
        arr = sorted(values)
        if new in arr:
            return
        strength = {v: v for v in arr} | {new: new}
        duel = comparator(strength)
        assert binary_search(0.1, new, arr, 0, len(arr) - 1, duel) == bisect.bisect(arr, new)
        assert len(duel.calls) <= math.ceil(math.log2(len(arr) + 1))
        assert len(set(duel.calls)) == len(duel.calls)


@pytest.mark.parametrize("n", range(1, 7))
def test_insertion_rank_all_orders(n):
    bound = n * max(1, math.ceil(math.log2(n))) if n > 1 else 0
    for perm in itertools.permutations(range(n)):
        strength = {e: -pos for pos, e in enumerate(perm)}  # perm is best-first
        order, count = insertion_rank(n, 0.1, comparator(strength))
        assert order == perm
        assert count <= bound


def test_ranking_delta():
    assert ranking_delta(4, 0.1) == pytest.approx(0.1 / 8)
    assert ranking_delta(5, 0.1) == pytest.approx(0.1 / 15)
    assert ranking_delta(2, 0.1) == pytest.approx(0.05)


class TestActiveRanking:
    def test_noiseless_n4_all_orders(self, noiseless):
        base = gen_chain_instance(4, 5, [0.3, 0.2, 0.4]).means
        for perm in itertools.permutations(range(4)):
            inst = permuted(base, perm)
            res = active_ranking(noiseless(inst), 0.1)
            assert res.pi_hat == inst.ordering == perm
            assert res.duel_count <= 8
            assert sum(res.duel_deltas) <= 0.1 + 1e-12
            assert not res.budget_exceeded

    def test_queries_match_oracle(self):
        inst = gen_chain_instance(3, 4, [0.8, 0.8])
        o = SamplingOracle(inst, seed=2)
        res = active_ranking(o, 0.1, keep_traces=True)
        assert res.queries == o.total == sum(t.queries for t in res.traces)
        assert len(res.traces) == res.duel_count

    def test_ties_need_cap(self):
        inst = validate_instance([[0.5, 0.5], [0.5, 0.5], [0.1, 0.1]])
        with pytest.raises(NotIdentifiable):
            active_ranking(SamplingOracle(inst), 0.1)
        res = active_ranking(SamplingOracle(inst, seed=1), 0.1, budget_cap=300_000)
        assert res.budget_exceeded
        assert sorted(res.pi_hat) == [0, 1, 2]

    def test_single_expert_is_trivial(self):
        res = active_ranking(SamplingOracle(validate_instance([[0.5]])), 0.1)
        assert res.pi_hat == (0,)
        assert res.queries == 0 and res.duel_count == 0


class TestMaxSearch:
    def test_champion_wins_everything(self):
        duel = comparator({1: 3, 2: 2, 3: 1})
        assert max_search(0.1, [1, 2, 3], 0.5, duel) == [1]

    def test_all_within_precision(self):
        duel = comparator({1: 0, 2: 0, 3: 0})
        assert max_search(0.1, [1, 2, 3], 0.5, duel) == [1, 2, 3]

    def test_champion_chain(self):
        duel = comparator({1: 3, 2: 2, 3: 1})
        assert max_search(0.1, [3, 2, 1], 0.5, duel) == [1]
        assert duel.calls == [(3, 2), (2, 1)]

    def test_cleanup_removes_beaten(self):
        # 9 ties the first champion, then 5 takes over and beats 9 on the second pass
        strength = {0: 1, 9: 1, 5: 2}
        duel = comparator(strength)
        assert max_search(0.1, [0, 9, 5], 0.5, duel) == [5]

    def test_per_duel_confidence(self):
        seen = []

        def duel(m, x, dl, eps):
            seen.append((dl, eps))
            return DuelOutcome.NULL

        max_search(0.2, [0, 1, 2, 3], 0.25, duel)
        assert set(seen) == {(0.2 / 8, 0.25)}

    def test_bad_args(self):
        with pytest.raises(BadParams):
            max_search(0.1, [], 1.0, comparator({}))
        with pytest.raises(BadParams):
            max_search(0.1, [0], 0.0, comparator({}))


class TestBestExpert:
    def test_noiseless_any_order(self, noiseless):
        base = gen_chain_instance(4, 6, [0.5, 0.3, 0.3]).means
        for perm in itertools.permutations(range(4)):
            inst = permuted(base, perm)
            res = best_expert(noiseless(inst), 0.1)
            assert res.k_hat == inst.best
            assert res.survivor_history[-1] == (inst.best,)
            assert sum(res.duel_deltas) <= 0.1 + 1e-12

    def test_round_count(self, noiseless):
        # precision after k rounds is 4^-(k-1); rounds end once it is below the top gap
        for gap in (0.9, 0.3, 0.1, 0.03):
            inst = gen_chain_instance(2, 4, [gap])
            res = best_expert(noiseless(inst), 0.1)
            assert res.rounds <= math.ceil(math.log(8 / gap, 4)) + 1

    def test_confidence_schedule(self):
        inst = gen_chain_instance(3, 4, [0.2, 0.9])
        res = best_expert(SamplingOracle(inst, seed=5), 0.1)
        assert res.k_hat == 0
        assert sum(res.duel_deltas) <= 0.1 + 1e-12

    def test_tied_best_needs_cap(self):
        inst = validate_instance([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(NotIdentifiable):
            best_expert(SamplingOracle(inst), 0.1)
        res = best_expert(SamplingOracle(inst, seed=0), 0.1, budget_cap=500_000)
        # either answer is a best expert; the cap bounds the work
        assert res.k_hat in (0, 1)
        assert res.queries <= 500_000


@pytest.mark.slow
def test_ranking_accuracy_monte_carlo():
    inst = gen_chain_instance(3, 4, [0.6, 0.6])
    reps = 30
    wrong = sum(active_ranking(SamplingOracle(inst, seed=s), 0.1).pi_hat != inst.ordering for s in range(reps))
    assert wrong / reps <= 0.1 + 3 * math.sqrt(0.09 / reps)
