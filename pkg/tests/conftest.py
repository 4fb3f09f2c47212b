import numpy as np
import pytest

from labelrepair.fixtures import noisy_example
from labelrepair.graph import build_graph


def random_graph(rng, max_left=6, max_right=6, max_colors=3, density=0.4, min_nodes=1):
    """Small random bipartite graph with random proposed labels."""
    L = int(rng.integers(min_nodes, max_left + 1))
    R = int(rng.integers(min_nodes, max_right + 1))
    d = int(rng.integers(1, max_colors + 1))
    mask = rng.random((L, R)) < density
    edges = np.argwhere(mask)
    labels = rng.integers(0, d, size=R)
    return build_graph(L, R, d, edges, labels)


def conflict_free(d=3, per_color=4, left_per_color=3):
    """Disjoint complete monochromatic blocks, labels equal to truth."""
    edges, labels = [], []
    for c in range(d):
        rs = range(c * per_color, (c + 1) * per_color)
        ls = range(c * left_per_color, (c + 1) * left_per_color)
        edges += [(l, r) for l in ls for r in rs]
        labels += [c] * per_color
    return build_graph(d * left_per_color, d * per_color, d, edges, labels)


@pytest.fixture
def example():
    return noisy_example()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
