import math

import pytest

from kw_graph import build_graph
from kw_graph.solve import SolveOptions


@pytest.fixture
def k2():
    return build_graph(["a", "b"], [("a", "b", 1.0)])


@pytest.fixture
def p3():
    return build_graph(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 1.0)])


@pytest.fixture
def opts():
    # smaller multistart than the packaged defaults; enough for 2-3 vertices
    return SolveOptions(n_starts=32, escalate=1, rng_seed=7)


@pytest.fixture
def flat_root():
    # exact root of K2, h = (1, -2), c = 0
    return [math.log(math.log(2.0)), math.log(math.log(2.0) / 2.0)]
