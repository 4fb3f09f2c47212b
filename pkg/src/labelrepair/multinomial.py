"""Randomized Dirichlet-multinomial message passing.

Every node keeps ``d + 1`` pseudo-counts (index 0 is wild).  On odd
iterations each right node draws one symbol from its normalized counts and
sends it to all its left neighbors, each of which adds one to that
component; on even iterations left nodes send to right nodes and every right
node also gets ``lambda_r`` added to its proposed color.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .base import BaseRepairer, check_in_range, wild_by_fraction
from .divergence import jsd, label_distribution
from .graph import WILD, BipartiteGraph

RIGHT_SIDE, LEFT_SIDE = 0, 1


def iteration_rng(seed, iteration, side) -> np.random.Generator:
    """Independent stream for one (iteration, side); node ``i`` uses row ``i``
    of each draw, so results do not depend on evaluation order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(iteration), int(side)]))


def _normalize(counts):
    s = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, s, out=np.zeros_like(counts), where=s > 0)


def _draw(counts, rng, q, wild_messages):
    """One symbol per node: ``-1`` silent, ``0`` wild, ``c + 1`` color ``c``."""
    n = counts.shape[0]
    u_wild = rng.random(n)
    u_pick = rng.random(n)
    if wild_messages:
        colors = counts[:, 1:]
        total = colors.sum(axis=1)
        p_col = np.divide(colors, total[:, None], out=np.zeros_like(colors), where=total[:, None] > 0)
        p_wild = np.clip(1.0 - jsd(p_col, q), 0.0, 1.0)
        p_wild = np.where(total > 0, p_wild, 0.0)
        cdf = np.cumsum(p_col, axis=1)
        pick = (cdf < u_pick[:, None]).sum(axis=1)
        sym = np.minimum(pick, colors.shape[1] - 1) + 1
        sym = np.where(u_wild < p_wild, 0, sym)
        # a node with only wild mass can still send wild
        only_wild = (total == 0) & (counts[:, 0] > 0)
        sym = np.where(only_wild, 0, sym)
        silent = (total == 0) & ~only_wild
    else:
        total = counts.sum(axis=1)
        cdf = np.cumsum(counts, axis=1)
        pick = (cdf <= (u_pick * total)[:, None]).sum(axis=1)
        sym = np.minimum(pick, counts.shape[1] - 1)
        silent = total == 0
    return np.where(silent, -1, sym)


def _deliver(adj, symbols, width):
    """Counts received by each node of the other side: ``adj`` maps receivers to senders."""
    sent = symbols >= 0
    idx = np.flatnonzero(sent)
    onehot = sp.csr_matrix((np.ones(idx.size), (idx, symbols[sent])), shape=(symbols.size, width))
    return (adj @ onehot).toarray()


def fixed_point_residual(graph, right_counts, left_counts) -> float:
    """Largest gap between a node's distribution and its neighbors' mean."""
    pr, pl = _normalize(right_counts), _normalize(left_counts)
    rd = graph.right_degree.astype(float)
    ld = graph.left_degree.astype(float)
    gaps = []
    if graph.edge_count:
        mr = (graph.right_adj @ pl) / np.where(rd > 0, rd, 1)[:, None]
        ml = (graph.left_adj @ pr) / np.where(ld > 0, ld, 1)[:, None]
        gaps.append(np.abs(pr - mr)[rd > 0].max(initial=0.0))
        gaps.append(np.abs(pl - ml)[ld > 0].max(initial=0.0))
    return float(max(gaps, default=0.0))


class MultinomialRepairer(BaseRepairer):
    """Sampling-based label propagation with optional wild messages.

    ``mu`` and ``lam`` multiply a right node's degree to give its initial
    count and per-even-iteration reinforcement on its proposed color.  With
    ``wild_messages`` a node sends the wild symbol with probability
    ``1 - JSD(colors, Q)``, ``Q`` being the proposed-label distribution.
    """

    name = "mba"

    def __init__(self, mu=0.25, lam=0.125, n_iter=200, seed=0, wild_messages=True,
                 wild_fraction=None, track_residual=True):
        self.mu = mu
        self.lam = lam
        self.n_iter = n_iter
        self.seed = seed
        self.wild_messages = wild_messages
        self.wild_fraction = wild_fraction
        self.track_residual = track_residual

    def _validate_params(self):
        check_in_range("mu", self.mu, low=0)
        check_in_range("lam", self.lam, low=0)
        check_in_range("n_iter", self.n_iter, low=1)
        if self.wild_fraction is not None:
            check_in_range("wild_fraction", self.wild_fraction, low=0, high=1)

    def _fit(self, graph):
        d = graph.num_colors
        R, L = graph.right_count, graph.left_count
        # degree floor of 1 so isolated nodes still hold their proposed label
        deg = np.maximum(graph.right_degree, 1).astype(float)
        rows = np.arange(R)
        right = np.zeros((R, d + 1))
        left = np.zeros((L, d + 1))
        right[rows, graph.labels + 1] = self.mu * deg
        reinforce = self.lam * deg
        q = label_distribution(graph)
        la, ra = graph.left_adj.astype(float), graph.right_adj.astype(float)
        residuals, added = [], []
        for it in range(1, self.n_iter + 1):
            if it % 2:
                sym = _draw(right, iteration_rng(self.seed, it, RIGHT_SIDE), q, self.wild_messages)
                inc = _deliver(la, sym, d + 1)
                left += inc
            else:
                sym = _draw(left, iteration_rng(self.seed, it, LEFT_SIDE), q, self.wild_messages)
                inc = _deliver(ra, sym, d + 1)
                inc[rows, graph.labels + 1] += reinforce
                right += inc
            added.append(float(inc.sum()))
            if self.track_residual:
                residuals.append(fixed_point_residual(graph, right, left))
        self.right_counts_ = right
        self.left_counts_ = left
        self.mass_trace_ = np.array(added)
        self.residual_trace_ = np.array(residuals)

        verdict = np.argmax(right, axis=1) - 1
        if self.wild_fraction is not None:
            colors = _normalize(right)[:, 1:]
            conf = colors.max(axis=1) if d else np.zeros(R)
            verdict = np.where(wild_by_fraction(conf, self.wild_fraction), WILD,
                               np.argmax(colors, axis=1))
        return verdict.astype(np.int64)
