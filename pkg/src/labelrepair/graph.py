"""Bipartite graph with proposed right-node labels, hidden ground truth and
the auxiliary (absorbing) view used by the random-walk methods.

Left and right node ids are dense 0-based integers per side, colors are dense
0-based integers.  The wild color is never a color index; it is the sentinel
``WILD = -1`` wherever a color-or-wild value is stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

WILD = -1


class GraphError(ValueError):
    pass


class OutOfRangeId(GraphError):
    pass


class LabelCountMismatch(GraphError):
    pass


def _csr_from_pairs(rows, cols, n_rows, n_cols):
    data = np.ones(len(rows), dtype=np.int8)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n_rows, n_cols))
    mat.sum_duplicates()
    mat.data[:] = 1
    mat.sort_indices()
    return mat


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Immutable bipartite adjacency with ``num_colors`` colors.

    ``right_adj`` is a ``right_count x left_count`` CSR matrix of ones;
    ``left_adj`` is its exact transpose.  Build instances with
    :func:`build_graph` rather than calling the constructor directly.
    """

    left_count: int
    right_count: int
    num_colors: int
    right_adj: sp.csr_matrix = field(repr=False)
    labels: np.ndarray = field(repr=False)

    @cached_property
    def left_adj(self) -> sp.csr_matrix:
        mat = self.right_adj.T.tocsr()
        mat.sort_indices()
        return mat

    @property
    def edge_count(self) -> int:
        return int(self.right_adj.nnz)

    @cached_property
    def right_degree(self) -> np.ndarray:
        return np.diff(self.right_adj.indptr)

    @cached_property
    def left_degree(self) -> np.ndarray:
        return np.diff(self.left_adj.indptr)

    def right_neighbors(self, r: int) -> np.ndarray:
        a = self.right_adj
        return a.indices[a.indptr[r]:a.indptr[r + 1]]

    def left_neighbors(self, l: int) -> np.ndarray:
        a = self.left_adj
        return a.indices[a.indptr[l]:a.indptr[l + 1]]

    def edges(self) -> np.ndarray:
        """Edges as an ``(E, 2)`` array of ``(left, right)``, sorted by left then right."""
        la = self.left_adj
        lefts = np.repeat(np.arange(self.left_count), np.diff(la.indptr))
        return np.column_stack([lefts, la.indices]).astype(np.int64)

    def label_onehot(self) -> sp.csr_matrix:
        """``right_count x num_colors`` indicator of the proposed labels."""
        return sp.csr_matrix(
            (np.ones(self.right_count), (np.arange(self.right_count), self.labels)),
            shape=(self.right_count, self.num_colors),
        )

    def with_labels(self, labels) -> "BipartiteGraph":
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (self.right_count,):
            raise LabelCountMismatch(f"expected {self.right_count} labels, got {labels.shape}")
        return BipartiteGraph(self.left_count, self.right_count, self.num_colors,
                              self.right_adj, labels)

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.left_count == other.left_count
            and self.right_count == other.right_count
            and self.num_colors == other.num_colors
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.right_adj.indptr, other.right_adj.indptr)
            and np.array_equal(self.right_adj.indices, other.right_adj.indices)
        )

    __hash__ = None


def build_graph(left_count, right_count, num_colors, edges, labels) -> BipartiteGraph:
    """Validate ids and build a :class:`BipartiteGraph`.

    ``edges`` is an iterable of ``(left, right)`` pairs; duplicates are stored
    once.  ``labels`` holds one proposed color per right node.
    """
    if num_colors < 1:
        raise GraphError("num_colors must be >= 1")
    if left_count < 0 or right_count < 0:
        raise GraphError("node counts must be non-negative")
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.shape[0] != right_count:
        raise LabelCountMismatch(f"expected {right_count} labels, got {labels.shape[0]}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_colors):
        raise OutOfRangeId("label outside [0, num_colors)")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if e.size:
        if e[:, 0].min() < 0 or e[:, 0].max() >= left_count:
            raise OutOfRangeId("left id out of range")
        if e[:, 1].min() < 0 or e[:, 1].max() >= right_count:
            raise OutOfRangeId("right id out of range")
    adj = _csr_from_pairs(e[:, 1], e[:, 0], right_count, left_count)
    labels.setflags(write=False)
    return BipartiteGraph(int(left_count), int(right_count), int(num_colors), adj, labels)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Hidden truth recorded by the generators.

    ``true_right_color`` uses ``WILD`` for wild right nodes.
    ``misattributed_edges`` is an ``(k, 2)`` array of ``(left, right)`` pairs.
    """

    true_right_color: np.ndarray
    true_left_color: np.ndarray
    misattributed_edges: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("true_right_color", "true_left_color"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
        m = np.asarray(self.misattributed_edges, dtype=np.int64).reshape(-1, 2)
        if len(m):
            m = np.unique(m, axis=0)
        object.__setattr__(self, "misattributed_edges", m)

    @property
    def wild_mask(self) -> np.ndarray:
        return self.true_right_color == WILD

    def mislabel_mask(self, graph: BipartiteGraph) -> np.ndarray:
        return (~self.wild_mask) & (self.true_right_color != graph.labels)

    def validate(self, graph: BipartiteGraph) -> None:
        if self.true_right_color.shape != (graph.right_count,):
            raise LabelCountMismatch("true_right_color length differs from right_count")
        if self.true_left_color.shape != (graph.left_count,):
            raise LabelCountMismatch("true_left_color length differs from left_count")
        m = self.misattributed_edges
        if len(m) == 0:
            return
        if not np.all(np.asarray(graph.right_adj[m[:, 1], m[:, 0]]).ravel()):
            raise GraphError("misattributed edge not present in graph")
        if np.any(self.wild_mask[m[:, 1]]):
            raise GraphError("wild right node has misattributed edges")

    def __eq__(self, other):
        if not isinstance(other, GroundTruth):
            return NotImplemented
        return (
            np.array_equal(self.true_right_color, other.true_right_color)
            and np.array_equal(self.true_left_color, other.true_left_color)
            and np.array_equal(self.misattributed_edges, other.misattributed_edges)
        )

    __hash__ = None


@dataclass(frozen=True)
class AuxiliaryView:
    """Read-only overlay adding one absorbing node per right node.

    Auxiliary node ``i`` is attached to right node ``i`` only and carries that
    node's proposed label.
    """

    graph: BipartiteGraph

    @property
    def aux_count(self) -> int:
        return self.graph.right_count

    @property
    def aux_colors(self) -> np.ndarray:
        return self.graph.labels

    @property
    def aux_edge_count(self) -> int:
        return self.graph.right_count

    def aux_neighbors(self, i: int) -> np.ndarray:
        if not 0 <= i < self.aux_count:
            raise OutOfRangeId(i)
        return np.array([i])

    def aux_degree(self) -> np.ndarray:
        return np.ones(self.aux_count, dtype=np.int64)


def auxiliary_view(graph: BipartiteGraph) -> AuxiliaryView:
    return AuxiliaryView(graph)
