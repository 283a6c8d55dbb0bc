import itertools

import numpy as np
import pytest

from trifree.graph_core import EdgePartition, Graph


def complete(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def wheel(rim):
    return Graph(rim + 1, [(i, (i + 1) % rim) for i in range(rim)] + [(rim, i) for i in range(rim)])


def friendship():
    # two triangles sharing vertex 0
    return Graph(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])


def star(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def whole(graph, k=1):
    return EdgePartition(graph, [graph.edge_array] * k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
