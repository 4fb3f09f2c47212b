"""Estimator plumbing shared by every repair algorithm.

Repairers follow the scikit-learn conventions: hyper-parameters are plain
``__init__`` arguments (so ``get_params``/``set_params``/``clone`` work),
``fit`` learns from one graph and stores results in trailing-underscore
attributes, and ``fit_predict`` returns one verdict per right node.

A verdict array holds the assigned color for each right node, or ``WILD``.
``KeepPrior`` is an assigned color equal to the proposed label and
``Relabel(c)`` is any other color.
"""
from __future__ import annotations

import enum
import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .graph import WILD, BipartiteGraph


class Verdict(enum.IntEnum):
    KEEP_PRIOR = 0
    RELABEL = 1
    WILD = 2


def verdict_kinds(assigned, labels) -> np.ndarray:
    assigned = np.asarray(assigned)
    labels = np.asarray(labels)
    kinds = np.full(assigned.shape, Verdict.RELABEL, dtype=np.int8)
    kinds[assigned == labels] = Verdict.KEEP_PRIOR
    kinds[assigned == WILD] = Verdict.WILD
    return kinds


def check_graph(graph) -> BipartiteGraph:
    """Input validation for repairers: a well-formed :class:`BipartiteGraph`."""
    if not isinstance(graph, BipartiteGraph):
        raise TypeError(f"expected a BipartiteGraph, got {type(graph).__name__}")
    if graph.labels.shape != (graph.right_count,):
        raise ValueError("graph labels do not match right_count")
    if graph.right_adj.shape != (graph.right_count, graph.left_count):
        raise ValueError("adjacency shape does not match node counts")
    return graph


def check_verdicts(assigned, graph: BipartiteGraph) -> np.ndarray:
    assigned = np.asarray(assigned, dtype=np.int64)
    if assigned.shape != (graph.right_count,):
        raise ValueError(f"expected {graph.right_count} verdicts, got {assigned.shape}")
    bad = (assigned != WILD) & ((assigned < 0) | (assigned >= graph.num_colors))
    if bad.any():
        raise ValueError("verdict color out of range")
    return assigned


def check_in_range(name, value, low=None, high=None, low_open=False, high_open=False):
    if low is not None and (value < low or (low_open and value == low)):
        raise ValueError(f"{name}={value!r} is below its allowed range")
    if high is not None and (value > high or (high_open and value == high)):
        raise ValueError(f"{name}={value!r} is above its allowed range")


def wild_by_fraction(score, fraction):
    """Mask of the ``fraction`` lowest-scoring nodes (ties broken by id)."""
    n = len(score)
    k = int(round(fraction * n))
    mask = np.zeros(n, dtype=bool)
    if k:
        mask[np.argsort(score, kind="stable")[:k]] = True
    return mask


class BaseRepairer(BaseEstimator):
    """Common ``fit_predict``/``predict`` on top of ``_fit``.

    Subclasses implement ``_fit(graph)`` returning the verdict array and may
    set further fitted attributes.  ``fit`` records the wall-clock time of the
    run in ``fit_time_``.
    """

    name = "base"

    def fit(self, graph, y=None):
        graph = check_graph(graph)
        self._validate_params()
        start = time.perf_counter()
        assigned = self._fit(graph)
        self.fit_time_ = time.perf_counter() - start
        self.verdicts_ = check_verdicts(assigned, graph)
        self.graph_ = graph
        return self

    def _validate_params(self):
        pass

    def _fit(self, graph):
        raise NotImplementedError

    def predict(self, graph=None):
        """Verdicts for the fitted graph; label repair is transductive."""
        if not hasattr(self, "verdicts_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        if graph is not None and graph is not self.graph_ and graph != self.graph_:
            raise ValueError("predict() only applies to the graph passed to fit()")
        return self.verdicts_

    def fit_predict(self, graph, y=None):
        return self.fit(graph).verdicts_

    def verdict_kinds(self):
        return verdict_kinds(self.predict(), self.graph_.labels)


class TrivialRepairer(BaseRepairer):
    """Keeps every proposed label."""

    name = "trv"

    def _fit(self, graph):
        return np.array(graph.labels, dtype=np.int64)


def trivial_baseline(graph) -> np.ndarray:
    return TrivialRepairer().fit_predict(graph)
