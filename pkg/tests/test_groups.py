import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupnet.generators import gen_caveman, gen_random
from groupnet.graph import UndirectedGraph, maximal_cliques
from groupnet.groups import (
    BipartiteMembership, GroupGenerationError, GroupGenSpec, generate_groups, membership_stats,
    read_membership_csv, write_membership_csv,
)

from conftest import graphs

CAVE = gen_caveman(10, 5)


def draw(g, n_groups, p, seed=0, **kw):
    return generate_groups(g, GroupGenSpec(n_groups, p, **kw), np.random.default_rng(seed))


class TestSpec:
    def test_validation(self):
        for bad in [dict(num_groups=0, p_clique=0.5), dict(num_groups=1, p_clique=1.5),
                    dict(num_groups=1, p_clique=0.5, min_clique_size=0),
                    dict(num_groups=1, p_clique=0.5, replacement="x"),
                    dict(num_groups=1, p_clique=0.5, noise="x")]:
            with pytest.raises(ValueError):
                GroupGenSpec(**bad)


class TestGenerate:
    def test_fidelity_one_reproduces_cliques(self):
        g = gen_random(30, 0.2, np.random.default_rng(1))
        b = draw(g, 200, 1.0)
        for members, src in zip(b.groups(), b.source_cliques):
            assert members == src

    def test_group_size_matches_source(self):
        g = gen_random(30, 0.2, np.random.default_rng(1))
        b = draw(g, 300, 0.6)
        assert [len(m) for m in b.groups()] == [len(s) for s in b.source_cliques]

    def test_column_count_and_sizes(self):
        b = draw(CAVE, 77, 0.7)
        assert b.group_count == 77 and (b.col_sums() >= 2).all()

    def test_zero_fidelity_on_caveman(self):
        b = draw(CAVE, 5000, 0.0, seed=4)
        hits = sum(set(m) != set(s) for m, s in zip(b.groups(), b.source_cliques))
        assert (b.col_sums() == 5).all()
        assert hits / b.group_count >= 0.999
        # outside_clique pool: no member of the source clique survives
        assert all(not set(m) & set(s) for m, s in zip(b.groups(), b.source_cliques))

    def test_any_pool_keeps_size(self):
        b = draw(CAVE, 500, 0.3, replacement="any")
        assert (b.col_sums() == 5).all()

    def test_no_qualifying_clique(self):
        with pytest.raises(GroupGenerationError):
            draw(UndirectedGraph.from_edges(4, []), 5, 1.0)

    def test_singletons_with_min_size_one(self):
        b = draw(UndirectedGraph.from_edges(4, []), 5, 1.0, min_clique_size=1)
        assert (b.col_sums() == 1).all()

    def test_exhausted_pool_counted(self):
        k4 = UndirectedGraph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        b = draw(k4, 50, 0.2)
        assert b.pool_exhausted > 0
        assert all(m == (0, 1, 2, 3) for m in b.groups())

    def test_deterministic(self):
        a = draw(CAVE, 100, 0.5, seed=9)
        b = draw(CAVE, 100, 0.5, seed=9)
        assert np.array_equal(a.incidence, b.incidence)

    def test_all_cliques_seen(self):
        g = gen_random(50, 0.08, np.random.default_rng(5))
        cl = maximal_cliques(g)
        pool = {c for c in cl if len(c) >= 2}
        runs = 100
        full = sum(set(draw(g, 50 * len(pool), 1.0, seed=s).groups()) >= pool
                   for s in range(runs))
        assert full >= 0.99 * runs

    def test_uniform_clique_choice(self):
        # caveman caves drawn with equal frequency
        b = draw(CAVE, 20_000, 1.0, seed=3)
        counts = np.bincount([m[0] // 5 for m in b.groups()], minlength=10)
        expected = 2000
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < 27.9          # 0.999 quantile, 9 df

    def test_per_group_noise(self):
        b = draw(CAVE, 4000, 0.5, seed=8, noise="per_group")
        intact = np.mean([m == s for m, s in zip(b.groups(), b.source_cliques)])
        assert abs(intact - 0.5) < 0.04
        assert (b.col_sums() == 5).all()

    @given(graphs(min_n=2, max_n=9), st.floats(0, 1), st.integers(1, 40),
           st.sampled_from(["outside_clique", "any"]), st.integers(0, 2**32))
    def test_size_conservation(self, g, p, n_groups, pool, seed):
        if not any(len(c) >= 2 for c in maximal_cliques(g)):
            return
        b = draw(g, n_groups, p, seed=seed, replacement=pool)
        assert sorted(b.col_sums()) == sorted(len(s) for s in b.source_cliques)
        assert b.incidence.dtype == bool

    def test_exchangeable_groups(self):
        # first and last group share one distribution over source caves
        first, last = [], []
        for s in range(2000):
            b = draw(CAVE, 4, 1.0, seed=s)
            first.append(b.groups()[0][0] // 5)
            last.append(b.groups()[-1][0] // 5)
        a, c = np.bincount(first, minlength=10), np.bincount(last, minlength=10)
        assert np.abs(a - c).max() < 80


class TestStats:
    def test_hand_count(self):
        b = BipartiteMembership.from_groups(3, [(0, 1), (1, 2)])
        assert membership_stats(b) == pytest.approx((2.0, 4 / 3))

    def test_repeated_clique(self):
        b = BipartiteMembership.from_groups(10, [(0, 1, 2, 3, 4)] * 7)
        assert membership_stats(b) == pytest.approx((5.0, 3.5))

    @given(st.integers(0, 2**32))
    def test_double_counting(self, seed):
        b = draw(CAVE, 60, 0.5, seed=seed)
        mgs, mm = membership_stats(b)
        assert b.agent_count * mm == pytest.approx(b.group_count * mgs)


class TestCsv:
    def test_round_trip(self):
        b = draw(CAVE, 20, 0.6)
        back = read_membership_csv(write_membership_csv(b), agent_labels=[str(i) for i in range(50)])
        assert np.array_equal(back.incidence, b.incidence)

    def test_header_required(self):
        with pytest.raises(ValueError):
            read_membership_csv("a,b\n1,2\n")

    def test_first_appearance(self):
        b = read_membership_csv("agent,group\nx,g1\ny,g1\nx,g2\n")
        assert b.agent_labels == ("x", "y") and b.group_labels == ("g1", "g2")
        assert b.incidence.tolist() == [[True, True], [True, False]]

    def test_bad_row(self):
        with pytest.raises(ValueError, match="line 2"):
            read_membership_csv("agent,group\nx\n")
