"""Small hand-built instances used in tests and docs."""
import numpy as np

from .graph import WILD, build_graph, GroundTruth

GREEN, BLUE, RED = 0, 1, 2

# x1..x11 -> left 0..10, y1..y11 -> right 0..10
_INPUT_EDGES = [
    (1, 1), (1, 2), (1, 4), (2, 2), (2, 3), (3, 3), (4, 3), (4, 5), (5, 5),
    (6, 7), (5, 6), (5, 8), (7, 5), (6, 5), (8, 7), (9, 9), (9, 10), (10, 11),
    (10, 8), (8, 10), (8, 8), (8, 11), (11, 3), (11, 6), (11, 7), (11, 9), (11, 11),
]


def noisy_example():
    """The eleven-by-eleven example graph with one mislabel, one wild node
    and three misattributed edges.

    Returns ``(graph, truth)``.  Colors: 0 green, 1 blue, 2 red.
    """
    edges = [(x - 1, y - 1) for y, x in _INPUT_EDGES]
    labels = [RED, GREEN, GREEN, GREEN, BLUE, BLUE, BLUE, RED, RED, RED, GREEN]
    graph = build_graph(11, 11, 3, edges, labels)
    true_right = [GREEN, GREEN, GREEN, GREEN, BLUE, BLUE, BLUE, RED, RED, RED, WILD]
    true_left = [GREEN] * 4 + [BLUE] * 3 + [RED] * 4
    # (x5,y4), (x8,y5), (x7,y8) replace edges of the clean graph
    misattr = [(4, 3), (7, 4), (6, 7)]
    return graph, GroundTruth(np.array(true_right), np.array(true_left), np.array(misattr))
