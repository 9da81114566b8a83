from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncharm import Refusal, freegrp, nclp
from ncharm.freegrp import IDENTITY, BallFunction, ReducedWord

# a = [[1, 2], [0, 1]] and b = [[1, 0], [2, 1]] generate a free subgroup of SL_2(Z)
SANOV = {
    (1, 1): np.array([[1, 2], [0, 1]], dtype=object),
    (1, -1): np.array([[1, -2], [0, 1]], dtype=object),
    (2, 1): np.array([[1, 0], [2, 1]], dtype=object),
    (2, -1): np.array([[1, 0], [-2, 1]], dtype=object),
}


def sanov(w: ReducedWord):
    M = np.eye(2, dtype=int).astype(object)
    for g, e in w.syllables:
        for _ in range(abs(e)):
            M = M.dot(SANOV[(g, 1 if e > 0 else -1)])
    return M


syllable_lists = st.lists(st.tuples(st.integers(1, 2), st.integers(-3, 3)), max_size=6)
words_f2 = syllable_lists.map(ReducedWord.reduce)


def brute_ball(n, L):
    """Distinct reductions of all letter strings of length <= L."""
    letters = [(g, s) for g in range(1, n + 1) for s in (1, -1)]
    seen = set()
    for k in range(L + 1):
        for combo in itertools.product(letters, repeat=k):
            w = ReducedWord.reduce(combo)
            if len(w) <= L:
                seen.add(w)
    return seen


class TestWords:
    def test_cancellation(self):
        a, b = freegrp.generator(1), freegrp.generator(2)
        assert a * a.inverse() == IDENTITY
        assert (a * b) * (b.inverse() * a) == freegrp.generator(1, 2)

    def test_rejects_unreduced(self):
        with pytest.raises(ValueError):
            ReducedWord(((1, 1), (1, 2)))
        with pytest.raises(ValueError):
            ReducedWord(((0, 1),))

    @settings(max_examples=200)
    @given(words_f2, words_f2)
    def test_homomorphism_into_sl2(self, x, y):
        assert np.array_equal(sanov(x * y), sanov(x).dot(sanov(y)))

    @settings(max_examples=200)
    @given(words_f2)
    def test_faithful_identity(self, x):
        # the Sanov image is the identity only for the empty word
        assert np.array_equal(sanov(x), np.eye(2, dtype=int)) == (x == IDENTITY)

    @settings(max_examples=200)
    @given(words_f2, words_f2, words_f2)
    def test_associative(self, x, y, z):
        assert (x * y) * z == x * (y * z)

    @settings(max_examples=200)
    @given(words_f2)
    def test_inverse_and_length(self, x):
        assert x * x.inverse() == IDENTITY
        assert len(x.inverse()) == len(x)

    @settings(max_examples=200)
    @given(words_f2)
    def test_parse_round_trip(self, x):
        assert ReducedWord.parse(str(x)) == x

    def test_parse_examples(self):
        assert ReducedWord.parse("e") == IDENTITY
        assert ReducedWord.parse("1^2.3^-1").syllables == ((1, 2), (3, -1))
        assert ReducedWord.parse("1.1^-1") == IDENTITY


class TestBalls:
    def test_small_counts(self):
        assert [freegrp.ball_count(2, k) for k in range(3)] == [1, 5, 17]
        assert freegrp.ball_count(3, 2) == 1 + 6 + 30
        assert freegrp.ball_count(2, 3) == 53

    @pytest.mark.parametrize("n,L", [(1, 6), (2, 5), (3, 4)])
    def test_enumeration_matches_bruteforce(self, n, L):
        ball = freegrp.ball_enumerate(n, L)
        assert len(ball) == len(set(ball))
        assert set(ball) == brute_ball(n, L)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_closed_form(self, n):
        for k in range(9):
            assert freegrp.ball_count(n, k) == pytest.approx(freegrp.ball_count_closed(n, k), rel=1e-14)
            assert math.log(freegrp.ball_count(n, k)) == pytest.approx(freegrp.log_ball_count(n, k),
                                                                     rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sphere_sizes(self, n):
        ball = freegrp.ball_enumerate(n, 6)
        lengths = np.bincount([len(w) for w in ball])
        assert list(lengths) == [freegrp.sphere_count(n, k) for k in range(7)]

    def test_cap_refusal(self):
        with pytest.raises(Refusal):
            freegrp.ball_enumerate(3, 8, cap=1000)


class TestHeatAndDistribution:
    def test_symbol(self):
        a = freegrp.generator(1)
        assert freegrp.heat_symbol(1.0, IDENTITY) == 1
        assert freegrp.heat_symbol(1.0, a) == math.exp(-1)
        assert freegrp.heat_symbol(0.5, ReducedWord.parse("1^2.2^-1")) == math.exp(-1.5)
        with pytest.raises(ValueError):
            freegrp.heat_symbol(0.0, a)

    def test_alpha_at_least_one(self):
        assert freegrp.distribution(2, 1.0, 1.0)["count"] == 0
        assert freegrp.distribution(2, 1.0, 3.0)["count"] == 0

    def test_example(self):
        res = freegrp.distribution(2, 1.0, math.exp(-1.5))
        assert res["count"] == 5
        assert res["bound"] == pytest.approx(8.0)

    def test_boundary_is_strict(self):
        # m_1(g) > e^{-2} excludes words of length 2 exactly
        assert freegrp.distribution(2, 1.0, math.exp(-2.0) * (1 + 1e-12))["count"] == 5
        assert freegrp.distribution(2, 1.0, math.exp(-2.0) * (1 - 1e-9))["count"] == 17

    def test_literal_bound_fails_above_integer_radius(self):
        # |log alpha|/t = 2 + eps: the level set is the ball B_2 (17 words) but 4^(2+eps) ~ 16
        res = freegrp.distribution(2, 1.0, math.exp(-2.01))
        assert res["count"] == 17 and res["bound"] < 17

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_bound_up_to_constant(self, n):
        # B_L <= C_n (2n)^L with C_n = n/(n-1), and C_1 = 3 since 2L + 1 <= 3 * 2^L
        C = 3.0 if n == 1 else n / (n - 1)
        for t in (0.3, 0.7, 1.0, 2.0):
            for alpha in np.geomspace(0.999, math.exp(-5 * t) if n == 3 else math.exp(-7 * t), 25):
                res = freegrp.distribution(n, t, float(alpha))
                assert res["count"] <= C * res["bound"] * (1 + 1e-12)

    def test_refusal_above_cap(self):
        with pytest.raises(Refusal):
            freegrp.distribution(3, 0.1, 1e-6)


def weak_norm_from_levels(n, t, r, kmax):
    # alpha lambda(alpha)^(1/r) sampled just below each jump e^{-tk}
    best = 0.0
    for k in range(kmax + 1):
        alpha = math.exp(-t * k) * (1 - 1e-12)
        best = max(best, alpha * freegrp.distribution(n, t, alpha)["count"] ** (1 / r))
    return best


class TestWeakNorm:
    @pytest.mark.parametrize("n,t,r", [(2, 1.2, 1.0), (3, 2.0, 1.0), (2, 1.0, 1.5), (1, 0.4, 1.0)])
    def test_matches_level_sets(self, n, t, r):
        res = freegrp.weak_norm_counting(n, t, r)
        assert res["finite"]
        assert res["value"] == pytest.approx(weak_norm_from_levels(n, t, r, 8), rel=1e-9)

    def test_log_six(self):
        # n = 3: terms e^{-tk} B_k are 1, 7/6, 37/36, ...
        assert freegrp.weak_norm_counting(3, math.log(6), 1.0)["value"] == pytest.approx(7 / 6)
        assert freegrp.weak_norm_bound(3, math.log(6), 1.0)["value"] == 1.0

    def test_infinite_r(self):
        assert freegrp.weak_norm_counting(2, 1.0, math.inf)["value"] == 1

    @pytest.mark.parametrize("n,r", [(2, 1.0), (3, 2.0)])
    def test_critical_limit(self, n, r):
        t = math.log(2 * n - 1) / r
        res = freegrp.weak_norm_counting(n, t, r)
        limit = (n / (n - 1)) ** (1 / r)
        assert res["finite"] and res["value"] == pytest.approx(limit)
        # the terms approach the limit from below
        terms = [math.exp(-t * k + freegrp.log_ball_count(n, k) / r) for k in (2, 5, 60)]
        assert terms[0] < terms[1] < limit and terms[-1] == pytest.approx(limit, rel=1e-12)

    @pytest.mark.parametrize("n,r", [(2, 1.0), (3, 1.0), (2, 2.0)])
    def test_flags_around_thresholds(self, n, r):
        exact, bound = freegrp.exact_threshold(n, r), math.log(2 * n) / r
        assert not freegrp.weak_norm_counting(n, 0.9 * exact, r)["finite"]
        assert freegrp.weak_norm_counting(n, 1.1 * exact, r)["finite"]
        # between the two thresholds the bound is too weak but the exact norm is finite
        mid = 0.5 * (exact + bound)
        assert freegrp.weak_norm_counting(n, mid, r)["finite"]
        assert not freegrp.weak_norm_bound(n, mid, r)["finite"]
        assert freegrp.weak_norm_bound(n, 1.1 * bound, r)["value"] == 1.0

    def test_one_generator_always_finite(self):
        assert freegrp.exact_threshold(1, 1.0) == 0
        assert freegrp.weak_norm_counting(1, 0.05, 1.0)["finite"]


class TestConvolver:
    def test_identity(self):
        M = freegrp.truncated_convolver(BallFunction.delta(2, 0), 2)
        np.testing.assert_array_equal(M.blocks[0], np.eye(17))
        assert M.weights == (1 / 17,)

    def test_generator_is_partial_permutation(self):
        L = 3
        M = freegrp.truncated_convolver(BallFunction.delta(2, 1, "1"), L).blocks[0]
        assert set(np.unique(M)) <= {0, 1}
        assert M.sum(axis=0).max() == 1 and M.sum(axis=1).max() == 1
        # x survives unless |x| = L and x does not start with the inverse letter
        survivors = freegrp.ball_count(2, L - 1) + freegrp.sphere_count(2, L) // 4
        assert M.sum() == survivors

    def test_action_matches_word_product(self, rng):
        f = BallFunction.random(2, 1, rng)
        ball = freegrp.ball_enumerate(2, 3)
        M = freegrp.truncated_convolver(f, 3).blocks[0]
        h = rng.normal(size=len(ball))
        out = dict.fromkeys(ball, 0j)
        for g, v in f.coeffs.items():
            for x, hx in zip(ball, h):
                y = g * x
                if y in out:
                    out[y] += v * hx
        np.testing.assert_allclose(M @ h, [out[w] for w in ball], atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_defect_of_generator(self, n):
        f = BallFunction.delta(n, 1, "1")
        for L in (2, 3, 4):
            kept = freegrp.ball_count(n, L - 1) + freegrp.sphere_count(n, L) / (2 * n)
            expected = 1 - kept / freegrp.ball_count(n, L)
            assert freegrp.truncation_defect(f, L) == pytest.approx(expected, abs=1e-12)

    def test_defect_limits(self):
        f2, f1 = BallFunction.delta(2, 1, "1"), BallFunction.delta(1, 1, "1")
        assert freegrp.truncation_defect(f2, 6) == pytest.approx(0.5, abs=1e-3)
        assert freegrp.truncation_defect(f1, 40) == pytest.approx(1 / 81)

    def test_support_too_large(self, rng):
        with pytest.raises(ValueError):
            freegrp.truncated_convolver(BallFunction.random(2, 3, rng), 2)

    def test_size_cap(self):
        with pytest.raises(Refusal):
            freegrp.truncated_convolver(BallFunction.delta(3, 0), 6)

    def test_word_outside_ball(self):
        with pytest.raises(ValueError):
            BallFunction(2, 1, {"1^2": 1.0})
        with pytest.raises(ValueError):
            BallFunction(2, 2, {"3": 1.0})


class TestMultiplier:
    def test_trace_is_value_at_identity(self, rng):
        f = BallFunction.random(2, 2, rng)
        for t in (0.3, 1.0):
            mf = freegrp.truncated_multiplier(lambda w: freegrp.heat_symbol(t, w), f)
            M = freegrp.truncated_convolver(mf, 3)
            assert nclp.trace(M) == pytest.approx(f(IDENTITY), abs=1e-12)

    def test_pointwise(self):
        f = BallFunction(2, 2, {"e": 2.0, "1.2": -1.0})
        mf = freegrp.truncated_multiplier(lambda w: freegrp.heat_symbol(0.5, w), f)
        assert mf(IDENTITY) == 2.0
        assert mf(ReducedWord.parse("1.2")) == pytest.approx(-math.exp(-1.0))
        assert mf(ReducedWord.parse("2")) == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_contraction_and_monotone(self, seed):
        f = BallFunction.random(2, 2, np.random.default_rng(seed), density=0.6)
        norms = [freegrp.multiplier_norms(2, 3, t, f) for t in (0.1, 0.5, 1.5)]
        assert all(d["norm_mf"] <= d["norm_f"] * (1 + 1e-12) for d in norms)
        seq = [d["norm_mf"] for d in norms]
        assert seq[0] >= seq[1] >= seq[2]


def msum(xi):
    return np.sum(xi, axis=-1)


class TestHM:
    def test_lift_examples(self):
        w = ReducedWord.parse("1^2.3^-1")
        assert freegrp.hm_lift(msum, IDENTITY, 3) == 0
        assert freegrp.hm_lift(msum, w, 3) == 1
        assert freegrp.hm_lift(lambda v: v[1], w, 3) == -1
        assert freegrp.hm_lift(lambda v: v[2], w, 3) == 0
        # only the first d exponents are seen
        assert freegrp.hm_lift(msum, w, 1) == 2
        assert freegrp.hm_lift(msum, ReducedWord.parse("1.2.1.2^5"), 3) == 3

    def test_constant(self):
        res = freegrp.hm_condition(lambda xi: np.ones(xi.shape[:-1]), 2)
        assert res["finite"] and res["C_m"] == pytest.approx(1.0)

    def test_linear_unbounded(self):
        res = freegrp.hm_condition(lambda xi: xi[..., 0], 2)
        assert not res["finite"] and res["C_m"] == math.inf

    def test_one_dimensional_closed_form(self):
        # sup of |m| and |xi m'| for m = 0.2 sin(5 log|xi|) is 1 (from xi m' = cos(5 log|xi|))
        def m(xi):
            x = np.abs(xi[..., 0])
            return 0.2 * np.sin(5 * np.log(np.where(x > 0, x, 1.0)))
        res = freegrp.hm_condition(m, 1, extent=8.0, h=0.002)
        assert res["finite"] and res["C_m"] == pytest.approx(1.0, rel=5e-3)
        assert res["worst_multi_index"] == [1]

    def test_bessel_symbol_stable(self):
        def m(xi):
            return 1.0 / (1.0 + np.sum(xi * xi, axis=-1))
        coarse = freegrp.hm_condition(m, 2, h=0.1)
        fine = freegrp.hm_condition(m, 2, h=0.05)
        assert coarse["finite"] and fine["finite"]
        assert fine["C_m"] == pytest.approx(coarse["C_m"], rel=0.05)

    def test_too_coarse(self):
        with pytest.raises(Refusal):
            freegrp.hm_condition(msum, 2, extent=1.0, h=0.5)
