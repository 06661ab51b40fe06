import numpy as np
import pytest

from tplp.graphs import Graph, eigendecompose, normalize


def random_graph(size: int, seed: int, density: float = 0.5) -> Graph:
    """Random symmetric nonnegative graph with a zero diagonal."""
    rng = np.random.default_rng(seed)
    w = rng.random((size, size))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    w[w < 1.0 - density] = 0.0
    return Graph(w)


def random_instance(dims, seed: int, density: float = 0.6):
    """(graphs, normalized, eigensystems) for a family of random graphs."""
    graphs = [random_graph(n, seed + 13 * i, density) for i, n in enumerate(dims)]
    normed = [normalize(g) for g in graphs]
    eigs = [eigendecompose(s) for s in normed]
    return graphs, normed, eigs


@pytest.fixture
def rng():
    return np.random.default_rng(0)
