import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import binom

from groupnet.poibin import (
    AUTO_EXACT_MAX, block_sf, moments, pmf, poisson_binomial_upper_tail, refined_normal_sf,
    resolve_method,
)


def enumerate_tail(probs, k):
    total = 0.0
    for outcome in itertools.product((0, 1), repeat=len(probs)):
        if sum(outcome) >= k:
            w = 1.0
            for x, q in zip(outcome, probs):
                w *= q if x else 1.0 - q
            total += w
    return total


prob_lists = st.lists(st.floats(0, 1), min_size=0, max_size=12)


class TestExact:
    def test_certain_event(self):
        assert poisson_binomial_upper_tail([0.2, 0.7], 0) == 1.0

    def test_impossible_event(self):
        assert poisson_binomial_upper_tail([0.2, 0.7, 1.0], 4) == 0.0

    def test_three_term_enumeration(self):
        # P(X >= 2) for [0.1, 0.5, 0.9] by enumerating all 8 outcomes
        expected = enumerate_tail([0.1, 0.5, 0.9], 2)
        assert expected == pytest.approx(0.5)
        assert poisson_binomial_upper_tail([0.1, 0.5, 0.9], 2) == pytest.approx(expected, abs=1e-15)

    @given(prob_lists, st.integers(0, 13))
    def test_matches_enumeration(self, probs, k):
        assert abs(poisson_binomial_upper_tail(probs, k) - enumerate_tail(probs, k)) < 1e-12

    @given(st.integers(1, 200), st.floats(0, 1), st.data())
    def test_binomial_oracle(self, n, q, data):
        k = data.draw(st.integers(0, n + 1))
        expected = binom.sf(k - 1, n, q) if k > 0 else 1.0
        assert abs(poisson_binomial_upper_tail([q] * n, k) - expected) < 1e-12

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
    def test_pmf_sums_to_one(self, probs):
        f = pmf(probs)
        assert f.size == len(probs) + 1
        assert abs(f.sum() - 1.0) < 1e-12 and (f >= -1e-15).all()

    def test_tiny_tail_keeps_precision(self):
        # P(X >= 40) for 40 Bernoulli(0.01) is 1e-80
        assert poisson_binomial_upper_tail([0.01] * 40, 40) == pytest.approx(1e-80, rel=1e-9)

    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 6)), min_size=1, max_size=5))
    def test_block_matches_expanded(self, blocks):
        q = np.array([b[0] for b in blocks])
        c = np.array([b[1] for b in blocks])
        flat = [qi for qi, ci in blocks for _ in range(ci)]
        sf = block_sf(q, c)
        for k in range(len(flat) + 2):
            assert abs(sf[k] - poisson_binomial_upper_tail(flat, k)) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            poisson_binomial_upper_tail([1.2], 1)
        with pytest.raises(ValueError):
            poisson_binomial_upper_tail([0.2], -1)
        with pytest.raises(ValueError):
            poisson_binomial_upper_tail([0.2], 1, method="magic")


class TestApproximation:
    def test_auto_threshold(self):
        assert resolve_method("auto", AUTO_EXACT_MAX) == "exact"
        assert resolve_method("auto", AUTO_EXACT_MAX + 1) == "refined_normal"

    def test_moments(self):
        mu, sd, gamma = moments([0.5, 0.5])
        assert (mu, sd, gamma) == pytest.approx((1.0, np.sqrt(0.5), 0.0))

    def test_degenerate_vector(self):
        assert poisson_binomial_upper_tail([1.0, 1.0, 0.0], 2, "refined_normal") == 1.0
        assert poisson_binomial_upper_tail([1.0, 1.0, 0.0], 3, "refined_normal") == 0.0

    @given(st.integers(64, 400), st.integers(0, 2**32))
    def test_close_on_long_vectors(self, n, seed):
        p = np.random.default_rng(seed).random(n)
        exact = block_sf(p, np.ones(n, dtype=int))
        mu, sd, gamma = moments(p)
        approx = refined_normal_sf(np.arange(n + 2), mu, sd, gamma)
        assert np.abs(exact - approx).max() < 5e-3

    def test_error_shrinks_with_length(self):
        rng = np.random.default_rng(0)

        def worst(n):
            errs = []
            for _ in range(200):
                p = rng.random(n)
                sf = block_sf(p, np.ones(n, dtype=int))
                errs.append(max(abs(sf[k] - poisson_binomial_upper_tail(p, k, "refined_normal"))
                                for k in range(n + 2)))
            return max(errs)

        assert worst(256) < worst(16) < worst(2)
