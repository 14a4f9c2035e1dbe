import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expertrank import (
    AllZero,
    BadIndex,
    BadParams,
    NotMonotone,
    OutOfRange,
    PerformanceMatrix,
    complexity_report,
    effective_sparsity,
    gap_profile,
    gen_chain_instance,
    validate_instance,
)


def brute_sparsity(x):
    """Independent oracle: plain-Python scan over every s of s * x_(s)^2."""
    xs = sorted((float(v) for v in x), reverse=True)
    best_s, best = 0, -1.0
    for s in range(1, len(xs) + 1):
        v = s * xs[s - 1] ** 2
        if v > best:
            best_s, best = s, v
    return best_s, best


class TestValidate:
    def test_dominating_first_row(self):
        inst = validate_instance([[1, 1], [0, 0]])
        assert inst.ordering == (0, 1)
        assert inst.strict_ranking and inst.strict_best
        assert inst.best == 0

    def test_row_swap(self):
        assert validate_instance([[0, 0], [1, 1]]).ordering == (1, 0)

    def test_incomparable(self):
        with pytest.raises(NotMonotone):
            validate_instance([[1, 0], [0, 1]])

    def test_out_of_range_checked_first(self):
        with pytest.raises(OutOfRange):
            validate_instance([[1.5, 0], [0, 1]])

    def test_ties_flagged(self):
        inst = validate_instance([[0.5, 0.5], [0.5, 0.5], [0.1, 0.2]])
        assert not inst.strict_ranking
        assert not inst.strict_best
        inst = validate_instance([[0.9, 0.5], [0.5, 0.5], [0.5, 0.5]])
        assert inst.strict_best and not inst.strict_ranking

    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            PerformanceMatrix(np.zeros(3))
        with pytest.raises(ValueError):
            PerformanceMatrix(np.array([[np.nan, 0.0]]))

    def test_rank_and_better(self):
        inst = validate_instance([[0.2, 0.2], [0.9, 0.8], [0.5, 0.5]])
        assert inst.ordering == (1, 2, 0)
        assert inst.rank_of(0) == 2
        assert inst.better(0, 2) == 2

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 6), st.integers(1, 8), st.randoms(use_true_random=False))
    def test_recovers_any_row_permutation(self, n, d, rnd):
        levels = np.linspace(1.0, 0.0, n)
        base = np.repeat(levels[:, None], d, axis=1)
        perm = list(range(n))
        rnd.shuffle(perm)
        m = np.empty_like(base)
        m[perm] = base
        assert validate_instance(m).ordering == tuple(perm)


class TestGapProfile:
    def test_examples(self):
        inst = validate_instance([[1, 1], [0, 0]])
        assert gap_profile(inst, 0, 1).gaps.tolist() == [1, 1]
        inst = validate_instance([[0.5, 0.2], [0.1, 0.2]])
        prof = gap_profile(inst, 0, 1)
        assert prof.gaps == pytest.approx([0.4, 0.0])
        assert prof.sorted_gaps == pytest.approx([0.4, 0.0])

    def test_identical_rows(self):
        inst = validate_instance([[0.3, 0.4], [0.3, 0.4]])
        assert not gap_profile(inst, 0, 1).gaps.any()

    @pytest.mark.parametrize("a,b", [(0, 0), (0, 2), (-1, 0)])
    def test_bad_index(self, a, b):
        inst = validate_instance([[1, 1], [0, 0]])
        with pytest.raises(BadIndex):
            gap_profile(inst, a, b)


class TestEffectiveSparsity:
    def test_spike(self):
        es = effective_sparsity([1, 0, 0, 0])
        assert (es.s_star, es.x_star, es.delta_star_sq) == (1, 1.0, 1.0)

    def test_constant(self):
        es = effective_sparsity(np.full(8, 0.5))
        assert es.s_star == 8
        assert es.delta_star_sq == pytest.approx(2.0)

    def test_decaying(self):
        es = effective_sparsity([0.8, 0.4, 0.2, 0.1])
        assert es.s_star == 1
        assert es.delta_star_sq == pytest.approx(0.64)

    def test_smallest_maximiser_on_ties(self):
        # 1 * 1^2 == 4 * 0.5^2
        assert effective_sparsity([1.0, 0.5, 0.5, 0.5]).s_star == 1

    def test_all_zero(self):
        with pytest.raises(AllZero):
            effective_sparsity(np.zeros(5))

    def test_negative_gap_rejected(self):
        with pytest.raises(BadParams):
            effective_sparsity([0.1, -0.2])

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, st.integers(1, 40), elements=st.floats(0, 1)))
    def test_matches_brute_force(self, x):
        if not x.any():
            return
        es = effective_sparsity(x)
        s, v = brute_sparsity(x)
        assert es.delta_star_sq == pytest.approx(v, rel=1e-12)
        assert es.s_star * es.x_star ** 2 == pytest.approx(v, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, st.integers(1, 60), elements=st.floats(0, 1)))
    def test_sandwich_harmonic(self, x):
        # the sharp upper constant is the harmonic number H_d
        if not x.any():
            return
        v = effective_sparsity(x).delta_star_sq
        norm2 = float(x @ x)
        harmonic = sum(1.0 / k for k in range(1, x.size + 1))
        assert v <= norm2 * (1 + 1e-12)
        assert norm2 <= harmonic * v * (1 + 1e-12)

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, st.integers(5, 60), elements=st.floats(0, 1)))
    def test_sandwich_log_from_five(self, x):
        if not x.any():
            return
        v = effective_sparsity(x).delta_star_sq
        assert float(x @ x) <= math.log(2 * x.size) * v * (1 + 1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_log_constant_too_small_below_five(self, d):
        # x_(s) = 1/sqrt(s) makes every s * x_(s)^2 equal to 1, so the norm ratio is H_d
        x = 1.0 / np.sqrt(np.arange(1, d + 1))
        ratio = float(x @ x) / effective_sparsity(x).delta_star_sq
        assert ratio > math.log(2 * d)

    @settings(max_examples=100, deadline=None)
    @given(arrays(float, st.integers(2, 30), elements=st.floats(0, 1)), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, x, rnd):
        if not x.any():
            return
        y = list(x)
        rnd.shuffle(y)
        assert effective_sparsity(y) == effective_sparsity(x)


class TestComplexity:
    def test_pair_h(self):
        rep = complexity_report(validate_instance([[1, 1], [0.5, 0.5]]), 0.1)
        assert rep.pair_H == pytest.approx(4.0)
        spike = np.zeros((2, 10))
        spike[0, 3] = 1
        assert complexity_report(validate_instance(spike), 0.1).pair_H == pytest.approx(10.0)

    def test_lb_two_value(self):
        # d=2, squared distance 0.5: (2 / (2 * 0.5)) * ln 4
        inst = validate_instance([[1, 1], [0.5, 0.5]])
        assert complexity_report(inst, 1 / 24).lb_two == pytest.approx(2.7726, abs=1e-4)
        chain = gen_chain_instance(2, 4, [1.0])
        assert complexity_report(chain, 1 / 24).lb_two == pytest.approx(2 * math.log(4))

    def test_lb_ranking_value(self):
        rep = complexity_report(gen_chain_instance(3, 4, [0.5, 0.5]), 0.1)
        assert rep.ranking_H == pytest.approx((16.0, 16.0))
        assert rep.best_G == pytest.approx((16.0, 4.0))
        assert rep.lb_ranking == pytest.approx(32 * math.log(2.5))
        assert rep.lb_ranking == pytest.approx(29.32, abs=5e-3)
        assert rep.lb_best == pytest.approx(20 * math.log(2.5))

    def test_identical_pair_is_infinite(self):
        rep = complexity_report(validate_instance([[0.5, 0.5], [0.5, 0.5]]), 0.1)
        assert rep.pair_H == math.inf
        assert rep.top_pair_sparsity is None

    def test_vacuous_log_factor(self):
        rep = complexity_report(gen_chain_instance(2, 4, [1.0]), 0.5)
        assert rep.lb_two == 0.0 and rep.lb_ranking == 0.0

    def test_bad_params(self):
        with pytest.raises(BadParams):
            complexity_report(validate_instance([[0.5]]), 0.1)
        with pytest.raises(BadParams):
            complexity_report(gen_chain_instance(2, 4, [1.0]), 1.0)
