import numpy as np
import pytest

from netqalign import Graph


def random_connected_graph(n, seed, extra_edges=None):
    """Seeded random connected undirected graph: a random spanning tree plus
    extra random edges (defaults to n // 2)."""
    rng = np.random.default_rng(seed)
    if extra_edges is None:
        extra_edges = n // 2
    order = rng.permutation(n)
    edges = set()
    for i in range(1, n):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 200:
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        tries += 1
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return Graph.from_edges(n, sorted(edges), directed=False)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)], directed=False)


@pytest.fixture
def single_edge():
    return Graph.from_edges(2, [(0, 1)], directed=False)
