"""Hill-climbing majority vote on the integer agreement objective.

The objective counts edges whose endpoints share a color plus a bonus
``tau_r`` for every right node that keeps its proposed label.  Left sweeps
and right sweeps each pick the per-node argmax, so with wildness disabled
the objective never decreases.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .base import BaseRepairer, check_in_range
from .graph import WILD, BipartiteGraph

UNASSIGNED = -1


def _onehot(colors, d):
    ok = colors >= 0
    idx = np.flatnonzero(ok)
    return sp.csr_matrix((np.ones(idx.size), (idx, colors[ok])), shape=(colors.size, d))


def _argmax_keep(tally, current):
    """Row-wise argmax; a tie that includes ``current`` keeps it, other ties
    go to the lowest color index.  Rows with no votes keep ``current``."""
    best = tally.max(axis=1) if tally.shape[1] else np.zeros(tally.shape[0])
    choice = np.argmax(tally, axis=1)
    rows = np.arange(tally.shape[0])
    has_cur = current >= 0
    keep = np.zeros(tally.shape[0], dtype=bool)
    keep[has_cur] = tally[rows[has_cur], current[has_cur]] == best[has_cur]
    choice = np.where(keep, current, choice)
    return np.where(best > 0, choice, current), best


def agreement_objective(graph: BipartiteGraph, left_color, right_color, tau) -> float:
    """Edges with equal endpoint colors plus ``tau`` on kept priors.  Wild right
    nodes contribute nothing."""
    edges = graph.edges()
    lc = left_color[edges[:, 0]]
    rc = right_color[edges[:, 1]]
    agree = int(np.sum((lc == rc) & (rc != WILD) & (lc != UNASSIGNED)))
    kept = (right_color == graph.labels) & (right_color != WILD)
    return agree + float(np.sum(np.asarray(tau)[kept]))


class VotingRepairer(BaseRepairer):
    """Alternating majority vote with per-node prior votes.

    Parameters
    ----------
    tau_multiplier : float
        A right node's prior vote is ``tau_multiplier * degree``.
    wild_threshold : float
        A right node whose winning tally is below this fraction of all its
        votes becomes wild and stops voting.  ``0`` disables wildness.
    max_sweeps : int
        Cap on left-then-right sweep pairs.
    """

    name = "vot"

    def __init__(self, tau_multiplier=0.25, wild_threshold=0.5, max_sweeps=100):
        self.tau_multiplier = tau_multiplier
        self.wild_threshold = wild_threshold
        self.max_sweeps = max_sweeps

    def _validate_params(self):
        check_in_range("tau_multiplier", self.tau_multiplier, low=0)
        check_in_range("wild_threshold", self.wild_threshold, low=0, high=1)
        check_in_range("max_sweeps", self.max_sweeps, low=1)

    def _fit(self, graph):
        d = graph.num_colors
        labels = np.asarray(graph.labels, dtype=np.int64)
        tau = self.tau_multiplier * graph.right_degree.astype(float)
        prior = sp.csr_matrix((tau, (np.arange(graph.right_count), labels)),
                              shape=(graph.right_count, d)).toarray()
        right = labels.copy()
        left = np.full(graph.left_count, UNASSIGNED, dtype=np.int64)
        trace = [agreement_objective(graph, left, right, tau)]
        converged = False
        sweeps = 0
        for sweeps in range(1, self.max_sweeps + 1):
            left_tally = (graph.left_adj @ _onehot(right, d)).toarray()
            new_left, _ = _argmax_keep(left_tally, left)

            active = right != WILD
            right_tally = (graph.right_adj @ _onehot(new_left, d)).toarray() + prior
            cur = np.where(active, right, UNASSIGNED)
            new_right, best = _argmax_keep(right_tally, cur)
            new_right = np.where(active, new_right, WILD)
            total = right_tally.sum(axis=1)
            if self.wild_threshold > 0:
                gone_wild = active & (best < self.wild_threshold * total)
                new_right[gone_wild] = WILD

            changed = not (np.array_equal(new_left, left) and np.array_equal(new_right, right))
            left, right = new_left, new_right
            trace.append(agreement_objective(graph, left, right, tau))
            if self.wild_threshold == 0 and trace[-1] < trace[-2] - 1e-9:
                raise AssertionError(f"objective fell at sweep {sweeps}")
            if not changed:
                converged = True
                break
        self.left_color_ = left
        self.objective_trace_ = np.array(trace)
        self.n_sweeps_ = sweeps
        self.converged_ = converged
        return right
