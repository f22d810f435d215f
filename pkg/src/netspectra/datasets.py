"""Small bundled graphs used by the documentation examples and presets."""

from __future__ import annotations

import numpy as np

from .graphs import WeightedDigraph, remove_edges

__all__ = [
    "demo_weights",
    "demo_graph",
    "karate_graph",
    "karate_cut_edges",
    "karate_cut_graph",
]

# 10-vertex directed weighted network; entry [k, j] is the weight of the
# edge k -> j (rows sum to the out-degree).
_DEMO_W = [
    [0.0000, 0.1466, 0.0075, 0.0238, 0.0000, 0.1048, 0.1446, 0.1913, 0.0000, 0.1758],
    [0.1780, 0.0000, 0.1909, 0.1436, 0.0000, 0.0000, 0.1696, 0.0000, 0.1865, 0.0153],
    [0.1470, 0.1313, 0.0000, 0.0175, 0.0575, 0.0651, 0.0000, 0.0009, 0.1297, 0.1010],
    [0.1021, 0.1326, 0.1169, 0.0000, 0.0374, 0.1238, 0.0000, 0.0000, 0.0061, 0.0342],
    [0.0929, 0.1052, 0.0000, 0.0200, 0.0000, 0.0000, 0.1646, 0.0000, 0.0000, 0.0182],
    [0.0058, 0.0000, 0.0000, 0.0795, 0.0557, 0.0000, 0.0000, 0.0892, 0.1143, 0.0165],
    [0.0850, 0.1551, 0.1060, 0.1301, 0.0000, 0.0149, 0.0000, 0.1748, 0.1631, 0.0509],
    [0.0524, 0.0000, 0.0000, 0.1887, 0.0079, 0.1701, 0.0000, 0.0000, 0.0632, 0.1182],
    [0.0000, 0.1926, 0.1678, 0.0500, 0.1875, 0.0000, 0.1289, 0.0000, 0.0000, 0.0557],
    [0.0000, 0.0028, 0.1156, 0.0000, 0.0236, 0.0635, 0.0000, 0.0228, 0.0000, 0.0000],
]


def demo_weights() -> np.ndarray:
    """Weight matrix of the bundled 10-vertex directed demo network."""
    return np.array(_DEMO_W)


def demo_graph() -> WeightedDigraph:
    """The bundled 10-vertex directed weighted demo network."""
    W = demo_weights()
    edges = tuple(
        (i, j, float(W[i, j]))
        for i in range(10)
        for j in range(10)
        if W[i, j] > 0
    )
    return WeightedDigraph(n=10, edges=edges, directed=True)


# Zachary's karate-club friendship network: 34 members, 78 ties, 0-based.
_KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8),
    (0, 10), (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32),
    (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32),
    (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32),
    (23, 33), (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33),
    (27, 33), (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33),
    (31, 32), (31, 33), (32, 33),
)

# The 11 ties that bridge the two factions the club eventually split into;
# removing them disconnects the graph into two components of 17 members each.
_KARATE_CUT = (
    (0, 31), (1, 30), (2, 9), (2, 27), (2, 28), (2, 32),
    (8, 30), (8, 32), (8, 33), (13, 33), (19, 33),
)


def karate_graph() -> WeightedDigraph:
    """Zachary's karate-club network (undirected, 34 vertices, 78 unit-weight
    edges)."""
    edges = tuple((i, j, 1.0) for i, j in _KARATE_EDGES)
    return WeightedDigraph(n=34, edges=edges, directed=False)


def karate_cut_edges() -> tuple[tuple[int, int], ...]:
    """The 11 between-faction ties of the karate-club network."""
    return _KARATE_CUT


def karate_cut_graph() -> WeightedDigraph:
    """Karate-club network with the between-faction ties removed (two
    components of 17 vertices each)."""
    return remove_edges(karate_graph(), _KARATE_CUT)
