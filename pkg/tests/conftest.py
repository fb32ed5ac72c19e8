import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from groupnet.graph import UndirectedGraph

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return UndirectedGraph.from_edges(n, [e for e, keep in zip(pairs, mask) if keep])


@st.composite
def incidences(draw, max_n=6, max_g=8):
    n = draw(st.integers(2, max_n))
    g = draw(st.integers(1, max_g))
    bits = draw(st.lists(st.booleans(), min_size=n * g, max_size=n * g))
    return np.array(bits, dtype=bool).reshape(n, g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
