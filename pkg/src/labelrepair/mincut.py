"""Per-color binary labeling by minimum s-t cut.

For color ``c`` every right node labeled ``c`` hangs off the source with
capacity ``pi0`` (the price of dropping its label) and every other right node
hangs off the sink with capacity ``pi1`` (the price of adopting ``c``).  Graph
edges become unit arcs in both directions.  The source side of a minimum cut
is the set of nodes assigned color ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .base import BaseRepairer, check_in_range
from .graph import WILD, BipartiteGraph

SOURCE, SINK = 0, 1


@dataclass(frozen=True)
class FlowNetwork:
    """Arc list over nodes ``0=s, 1=t, 2..R+1`` (right) and ``R+2..`` (left)."""

    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    capacities: np.ndarray
    right_count: int
    left_count: int

    @property
    def arc_count(self) -> int:
        return int(self.tails.size)

    def right_node(self, r):
        return 2 + np.asarray(r)

    def left_node(self, l):
        return 2 + self.right_count + np.asarray(l)

    def dumps(self) -> str:
        """Plain ``tail head capacity`` arc list, one arc per line."""
        lines = [f"# nodes={self.node_count} s={SOURCE} t={SINK}"]
        lines += [f"{a} {b} {c:g}" for a, b, c in zip(self.tails, self.heads, self.capacities)]
        return "\n".join(lines) + "\n"


def penalties(graph: BipartiteGraph, pi0=0.75, pi1=0.5):
    deg = graph.right_degree.astype(float)
    return pi0 * deg, pi1 * deg


def build_network(graph: BipartiteGraph, color: int, pi0=0.75, pi1=0.5) -> FlowNetwork:
    """Flow network for one color.  Multipliers apply to right-node degrees."""
    R, L = graph.right_count, graph.left_count
    p0, p1 = penalties(graph, pi0, pi1)
    in_c = graph.labels == color
    rights = np.arange(R)
    edges = graph.edges()
    rn = 2 + edges[:, 1]
    ln = 2 + R + edges[:, 0]
    tails = np.concatenate([np.full(in_c.sum(), SOURCE), 2 + rights[~in_c], rn, ln])
    heads = np.concatenate([2 + rights[in_c], np.full((~in_c).sum(), SINK), ln, rn])
    caps = np.concatenate([p0[in_c], p1[~in_c], np.ones(2 * len(edges))])
    return FlowNetwork(2 + R + L, tails.astype(np.int64), heads.astype(np.int64),
                       caps.astype(float), R, L)


def _integer_scale(caps, max_denominator=1 << 16):
    """Common denominator that turns ``caps`` into integers."""
    scale = 1
    for c in np.unique(caps):
        den = Fraction(float(c)).limit_denominator(max_denominator).denominator
        scale = scale * den // np.gcd(scale, den)
    return scale


def min_cut(net: FlowNetwork):
    """Return ``(cut_value, source_side)`` where ``source_side`` is the boolean
    mask of nodes reachable from ``s`` in the final residual network."""
    n = net.node_count
    if net.arc_count == 0:
        side = np.zeros(n, dtype=bool)
        side[SOURCE] = True
        return 0.0, side
    scale = _integer_scale(net.capacities)
    icap = np.rint(net.capacities * scale).astype(np.int64)
    if icap.max(initial=0) >= np.iinfo(np.int32).max:
        raise OverflowError("capacities too large for the flow solver")
    cap = sp.csr_matrix((icap.astype(np.int32), (net.tails, net.heads)), shape=(n, n))
    cap.sum_duplicates()
    result = maximum_flow(cap, SOURCE, SINK, method="dinic")
    flow = result.flow.tocsr()
    residual = (cap.astype(np.int64) - flow.astype(np.int64)).tocsr()
    residual.data[residual.data < 0] = 0
    residual.eliminate_zeros()
    reach = breadth_first_order(residual, SOURCE, directed=True, return_predecessors=False)
    side = np.zeros(n, dtype=bool)
    side[reach] = True
    return result.flow_value / scale, side


def cut_capacity(net: FlowNetwork, side) -> float:
    """Total capacity of arcs leaving ``side``."""
    side = np.asarray(side, dtype=bool)
    crossing = side[net.tails] & ~side[net.heads]
    return float(net.capacities[crossing].sum())


def cut_objective(graph: BipartiteGraph, color, x_right, x_left, pi0=0.75, pi1=0.5) -> float:
    """Labeling cost: dropped priors, adopted colors and split edges."""
    p0, p1 = penalties(graph, pi0, pi1)
    x_right = np.asarray(x_right, dtype=bool)
    x_left = np.asarray(x_left, dtype=bool)
    in_c = graph.labels == color
    e = graph.edges()
    split = np.sum(x_left[e[:, 0]] != x_right[e[:, 1]])
    return float(p0[in_c & ~x_right].sum() + p1[~in_c & x_right].sum() + split)


def consolidate(memberships) -> np.ndarray:
    """``memberships`` is a ``right_count x d`` boolean array.  A node in exactly
    one source set takes that color; in none or several it is wild."""
    m = np.asarray(memberships, dtype=bool)
    count = m.sum(axis=1)
    out = np.full(m.shape[0], WILD, dtype=np.int64)
    one = count == 1
    out[one] = np.argmax(m[one], axis=1)
    return out


class MinCutRepairer(BaseRepairer):
    """One minimum cut per color, consolidated into verdicts.

    ``pi0`` and ``pi1`` multiply a right node's degree to give its penalty for
    dropping its label and for adopting another color.
    """

    name = "cut"

    def __init__(self, pi0=0.75, pi1=0.5):
        self.pi0 = pi0
        self.pi1 = pi1

    def _validate_params(self):
        check_in_range("pi0", self.pi0, low=0)
        check_in_range("pi1", self.pi1, low=0)

    def _fit(self, graph):
        d, R = graph.num_colors, graph.right_count
        member = np.zeros((R, d), dtype=bool)
        values = np.zeros(d)
        present = np.bincount(graph.labels, minlength=d) > 0
        for c in np.flatnonzero(present):
            net = build_network(graph, int(c), self.pi0, self.pi1)
            values[c], side = min_cut(net)
            member[:, c] = side[2:2 + R]
        self.memberships_ = member
        self.cut_values_ = values
        out = consolidate(member)
        # zero penalties leave isolated nodes on no source side
        isolated = graph.right_degree == 0
        out[isolated] = graph.labels[isolated]
        return out
