"""Shared fixtures and brute-force oracles."""
from __future__ import annotations

import numpy as np
import pytest

from netdenoise.graphs import Graph
from netdenoise.metrics import INF


def random_graph(rng: np.random.Generator, n: int, density: float) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < density
    return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def adjacency_sets(g: Graph) -> list[set]:
    return [set(int(w) for w in g.neighbors(v)) for v in range(g.n)]


def floyd_warshall(g: Graph) -> np.ndarray:
    """Hop counts as floats with np.inf for disconnected pairs."""
    d = np.full((g.n, g.n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v in g.edges():
        d[u, v] = d[v, u] = 1.0
    for k in range(g.n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def as_float_hops(entries: np.ndarray) -> np.ndarray:
    out = entries.astype(float)
    out[entries == INF] = np.inf
    return out


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
