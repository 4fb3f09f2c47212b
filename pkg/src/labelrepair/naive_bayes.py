"""Iterated Bayes updates under conditional independence of neighbors.

Every node holds a belief over ``d + 1`` outcomes: index 0 is wild and index
``i + 1`` is color ``i``.  A sweep updates all left nodes from the right
beliefs, then all right nodes from the new left beliefs.  Products over
neighbors are sums of logarithms, so high-degree nodes do not underflow.
"""
from __future__ import annotations

import warnings

import numpy as np

from .base import BaseRepairer, check_in_range, wild_by_fraction
from .graph import WILD, BipartiteGraph
from .metrics import snr_2path


def neighbor_factor(belief, color, alpha_hat) -> float:
    """``q + (1 - q) * alpha_hat`` with ``q`` the neighbor's mass on ``color``
    (1-based index into ``belief``) plus its wild mass."""
    q = belief[color] + belief[0]
    return q + (1.0 - q) * alpha_hat


def wild_factor(belief, color_prior) -> float:
    """Likelihood of an edge to a wild node: the prior dotted with the belief."""
    return float(np.dot(color_prior, belief))


def _factor_logs(beliefs, prior, alpha_hat, likelihood):
    """Log per-neighbor factors, one row per sender, column 0 for wild.
    ``alpha_hat`` is a scalar or one value per sender."""
    n, k = beliefs.shape
    a = np.asarray(alpha_hat, dtype=beliefs.dtype)
    if a.ndim:
        a = a[:, None]
    out = np.empty((n, k), dtype=beliefs.dtype)
    w = beliefs @ prior
    out[:, 0] = w
    col = out[:, 1:]
    np.add(beliefs[:, 1:], beliefs[:, :1], out=col)
    # both forms are affine in q: a + (1 - a) q, or a w + (1 - a) q
    col *= 1.0 - a
    col += a if likelihood == "literal" else a * w[:, None]
    with np.errstate(divide="ignore"):
        np.log(out, out=out)
    return out


def _posterior(adj, sender_logs, log_prior, override=None):
    """Normalized posterior for every receiving node; rows that come out
    all-zero fall back to the prior and are flagged.  ``override`` is an
    optional ``(rows, sums)`` pair replacing the neighbor sums of some rows."""
    if adj.nnz:
        s = np.asarray(adj @ sender_logs)
        if sender_logs.size and np.isneginf(sender_logs.min()):
            # sparse products turn 0 * -inf into nan when a column is never touched
            s[np.isnan(s)] = -np.inf
    else:
        s = np.zeros((adj.shape[0], sender_logs.shape[1]), dtype=sender_logs.dtype)
    if override is not None:
        s[override[0]] = override[1]
    s += log_prior
    top = s.max(axis=1, keepdims=True) if s.shape[1] else np.zeros((s.shape[0], 1))
    bad = ~np.isfinite(top[:, 0])
    if bad.any():
        s[bad] = np.broadcast_to(log_prior, s.shape)[bad]
        top[bad] = s[bad].max(axis=1, keepdims=True)
    s -= top
    np.exp(s, out=s)
    s /= s.sum(axis=1, keepdims=True)
    return s, bad


def capacity_alpha(graph: BipartiteGraph, alpha_hat) -> np.ndarray:
    """Per right node misattribution, at least ``1 - (|L| / d) / deg``: a node
    cannot have more same-color neighbors than its color has left nodes."""
    cap = graph.left_count / max(graph.num_colors, 1)
    deg = np.maximum(graph.right_degree, 1).astype(float)
    return np.clip(np.maximum(alpha_hat, 1.0 - cap / deg), 0.0, 1.0 - 1e-9)


def _own_alpha_sums(rows, ra, left, prior, alpha_r, likelihood):
    """Neighbor log sums for right ``rows`` scored with each row's own alpha."""
    sub = ra[rows]
    per_edge = np.repeat(alpha_r[rows], np.diff(sub.indptr))
    logs = _factor_logs(left[sub.indices], prior, per_edge, likelihood)
    return np.add.reduceat(logs, sub.indptr[:-1], axis=0)


def default_prior(num_colors, wild_mass=0.15, weights=None):
    if weights is None:
        colors = np.full(num_colors, (1.0 - wild_mass) / num_colors)
    else:
        wts = np.asarray(weights, dtype=float)
        colors = (1.0 - wild_mass) * wts / wts.sum()
    return np.concatenate([[wild_mass], colors])


def initial_right_beliefs(graph: BipartiteGraph, right_init=(0.34, 0.30, 0.36)):
    p_match, p_wild, p_other = right_init
    d = graph.num_colors
    b = np.full((graph.right_count, d + 1), p_other / max(d - 1, 1))
    b[:, 0] = p_wild
    b[np.arange(graph.right_count), graph.labels + 1] = p_match
    if d == 1:
        b[:, 1] += p_other
    return b


class NaiveBayesRepairer(BaseRepairer):
    """Alternating Bayes updates with explicit wild and misattribution terms.

    Parameters
    ----------
    alpha_hat : float or None
        Misattribution estimate; ``None`` uses ``1 - sqrt(snr_2path)``.
    wild_prior : float
        Prior mass on wild; the rest is spread over colors uniformly, or by
        label frequency when ``frequency_prior`` is set.
    right_init : tuple
        ``(p_match, p_wild, p_other)`` initial right beliefs; ``p_other`` is
        split over the other colors.  With two colors the default gives the
        other color more than the proposed one, and ``fit`` warns.
    likelihood : {"calibrated", "literal"}
        ``"calibrated"`` scores a neighbor under color ``i`` as
        ``(1 - a) * q + a * w`` where ``w`` is the wild factor, so colored and
        wild hypotheses are compared on the same scale.  ``"literal"`` uses
        :func:`neighbor_factor`.
    label_evidence : {"prior", "init"}
        ``"prior"`` keeps the ``right_init`` table as each right node's fixed
        prior in every sweep.  ``"init"`` uses it only to seed the beliefs and
        scores right nodes against the color prior afterwards.
    left_wild : bool
        Whether left nodes may hold wild mass.  Off by default since only
        right nodes can be wild.
    wild_fraction : float or None
        If set, mark this share of right nodes with the lowest color
        confidence wild instead of using the wild argmax.
    capacity_bound : bool
        Raise the misattribution estimate of right nodes whose degree exceeds
        the number of left nodes per color (see :func:`capacity_alpha`).  An
        edge at such a hub says little about either endpoint's color.
    dtype : {"float32", "float64"}
        Working precision of the belief matrices.  Verdicts only need the
        argmax, so float32 is the default; it halves memory traffic.
    """

    name = "nba"

    def __init__(self, alpha_hat=None, wild_prior=0.15, frequency_prior=False,
                 right_init=(0.34, 0.30, 0.36), likelihood="calibrated",
                 max_sweeps=50, tol=1e-6, label_evidence="prior", left_wild=False,
                 wild_fraction=None, capacity_bound=True, dtype="float32"):
        self.alpha_hat = alpha_hat
        self.wild_prior = wild_prior
        self.frequency_prior = frequency_prior
        self.right_init = right_init
        self.likelihood = likelihood
        self.max_sweeps = max_sweeps
        self.tol = tol
        self.label_evidence = label_evidence
        self.left_wild = left_wild
        self.wild_fraction = wild_fraction
        self.capacity_bound = capacity_bound
        self.dtype = dtype

    def _validate_params(self):
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be 'float32' or 'float64'")
        if self.alpha_hat is not None:
            check_in_range("alpha_hat", self.alpha_hat, low=0, high=1, high_open=True)
        check_in_range("wild_prior", self.wild_prior, low=0, high=1, high_open=True)
        init = np.asarray(self.right_init, dtype=float)
        if init.shape != (3,) or np.any(init < 0) or abs(init.sum() - 1) > 1e-9:
            raise ValueError("right_init must be three nonnegative numbers summing to 1")
        if self.likelihood not in ("calibrated", "literal"):
            raise ValueError("likelihood must be 'calibrated' or 'literal'")
        if self.label_evidence not in ("prior", "init"):
            raise ValueError("label_evidence must be 'prior' or 'init'")
        check_in_range("max_sweeps", self.max_sweeps, low=1)
        if self.wild_fraction is not None:
            check_in_range("wild_fraction", self.wild_fraction, low=0, high=1)

    def _fit(self, graph):
        d = graph.num_colors
        alpha = self.alpha_hat
        if alpha is None:
            alpha = min(max(1.0 - np.sqrt(snr_2path(graph)), 0.0), 1.0 - 1e-9)
        weights = np.bincount(graph.labels, minlength=d) if self.frequency_prior else None
        prior = default_prior(d, self.wild_prior, weights)
        left_prior = prior.copy()
        if not self.left_wild:
            left_prior[0] = 0.0
            left_prior /= left_prior.sum()
        p_match, _, p_other = self.right_init
        if d > 1 and p_other / (d - 1) >= p_match:
            warnings.warn("right_init gives another color at least the proposed label's "
                          "mass; the proposed labels will count against themselves",
                          UserWarning, stacklevel=3)
        ft = np.dtype(self.dtype)
        prior = prior.astype(ft)
        right = initial_right_beliefs(graph, self.right_init).astype(ft)
        with np.errstate(divide="ignore"):
            log_left_prior = np.log(left_prior.astype(ft))
            log_right_prior = np.log(right) if self.label_evidence == "prior" else np.log(prior)
        left = np.tile(left_prior, (graph.left_count, 1)).astype(ft)
        la, ra = graph.left_adj.astype(ft), graph.right_adj.astype(ft)
        r_has = graph.right_degree > 0
        l_has = graph.left_degree > 0
        flagged_l = np.zeros(graph.left_count, dtype=bool)
        flagged_r = np.zeros(graph.right_count, dtype=bool)
        if self.capacity_bound:
            alpha_r = capacity_alpha(graph, alpha)
            hubs = np.flatnonzero(r_has & (alpha_r > alpha))
        else:
            alpha_r, hubs = np.full(graph.right_count, alpha), np.empty(0, dtype=np.int64)
        changes = []
        for sweep in range(1, self.max_sweeps + 1):
            new_left, bad_l = _posterior(la, _factor_logs(right, prior, alpha_r, self.likelihood),
                                         log_left_prior)
            new_left[~l_has] = left[~l_has]
            # edges of a hub are scored with the hub's own alpha on the way in as well
            own = (hubs, _own_alpha_sums(hubs, ra, new_left, prior, alpha_r, self.likelihood)) \
                if len(hubs) else None
            new_right, bad_r = _posterior(ra, _factor_logs(new_left, prior, alpha, self.likelihood),
                                          log_right_prior, own)
            new_right[~r_has] = right[~r_has]
            flagged_l |= bad_l & l_has
            flagged_r |= bad_r & r_has
            delta = max(np.abs(new_left - left).max(initial=0.0), np.abs(new_right - right).max(initial=0.0))
            left, right = new_left, new_right
            changes.append(float(delta))
            if delta < self.tol:
                break
        self.alpha_hat_ = alpha
        self.right_alpha_ = alpha_r
        self.color_prior_ = prior
        self.left_beliefs_ = left
        self.right_beliefs_ = right
        self.change_trace_ = np.array(changes)
        self.n_sweeps_ = len(changes)
        self.flagged_left_ = flagged_l
        self.flagged_right_ = flagged_r

        verdict = np.argmax(right, axis=1) - 1
        if self.wild_fraction is not None:
            colors = right[:, 1:]
            best = np.argmax(colors, axis=1)
            conf = colors.max(axis=1) if d else np.zeros(graph.right_count)
            verdict = np.where(wild_by_fraction(conf, self.wild_fraction), WILD, best)
        verdict = verdict.astype(np.int64)
        verdict[~r_has] = graph.labels[~r_has]
        return verdict
