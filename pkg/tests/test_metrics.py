import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupnet.graph import UndirectedGraph
from groupnet.metrics import (
    ConfusionCounts, confusion, indicator_correlation, scores, similarity,
)

from conftest import graphs


def complement(g):
    return UndirectedGraph.from_edges(
        g.node_count, set(itertools.combinations(range(g.node_count), 2)) - g.edges)


TRI = UndirectedGraph.from_edges(4, [(0, 1), (0, 2), (1, 2)])


@st.composite
def graph_pairs(draw):
    a = draw(graphs(min_n=2, max_n=10))
    pairs = list(itertools.combinations(range(a.node_count), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return a, UndirectedGraph.from_edges(a.node_count, [e for e, k in zip(pairs, mask) if k])


class TestConfusion:
    def test_identical(self):
        assert confusion(TRI, TRI) == ConfusionCounts(3, 0, 0, 3)

    def test_complement(self):
        assert confusion(TRI, complement(TRI)) == ConfusionCounts(0, 3, 3, 0)

    def test_hand_count(self):
        inferred = UndirectedGraph.from_edges(4, [(0, 1)])
        assert confusion(TRI, inferred) == ConfusionCounts(1, 0, 2, 3)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            confusion(TRI, UndirectedGraph.from_edges(5, []))

    @given(graph_pairs())
    def test_total(self, pair):
        a, b = pair
        n = a.node_count
        assert confusion(a, b).total == n * (n - 1) // 2


class TestScores:
    def test_identical(self):
        s = similarity(TRI, TRI)
        assert (s.correlation, s.kappa, s.jaccard) == pytest.approx((1, 1, 1))

    def test_complement(self):
        s = similarity(TRI, complement(TRI))
        assert s.correlation == pytest.approx(-1) and s.jaccard == 0

    def test_small_table(self):
        s = scores(ConfusionCounts(1, 1, 2, 3))
        assert s.jaccard == pytest.approx(0.25)
        truth = np.array([1, 1, 1, 0, 0, 0, 0])      # tp, fn, fn, fp, tn, tn, tn
        pred = np.array([1, 0, 0, 1, 0, 0, 0])
        assert s.correlation == pytest.approx(np.corrcoef(truth, pred)[0, 1], abs=1e-12)
        po = np.mean(truth == pred)
        pe = truth.mean() * pred.mean() + (1 - truth.mean()) * (1 - pred.mean())
        assert s.kappa == pytest.approx((po - pe) / (1 - pe), abs=1e-12)

    def test_undefined(self):
        s = similarity(TRI, UndirectedGraph.from_edges(4, []))
        assert math.isnan(s.correlation) and s.jaccard == 0.0
        s = scores(ConfusionCounts(0, 0, 0, 6))
        assert math.isnan(s.correlation) and math.isnan(s.kappa) and math.isnan(s.jaccard)

    @given(graph_pairs())
    def test_matches_pearson(self, pair):
        a, b = pair
        r = similarity(a, b).correlation
        oracle = indicator_correlation(a, b)
        if math.isnan(oracle):
            assert math.isnan(r)
        else:
            assert abs(r - oracle) < 1e-12

    @given(graph_pairs())
    def test_symmetric_and_ranged(self, pair):
        a, b = pair
        s, t = similarity(a, b), similarity(b, a)
        assert s.correlation == t.correlation or (math.isnan(s.correlation)
                                                  and math.isnan(t.correlation))
        if not math.isnan(s.correlation):
            assert -1 - 1e-12 <= s.correlation <= 1 + 1e-12
        if not math.isnan(s.jaccard):
            assert 0 <= s.jaccard <= 1
        if not math.isnan(s.kappa):
            assert -1 - 1e-12 <= s.kappa <= 1 + 1e-12
