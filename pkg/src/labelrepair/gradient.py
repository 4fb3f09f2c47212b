"""Box-constrained least squares fit of left-node color scores.

For every color ``c`` the left scores ``x`` minimize
``sum_r ((sum_{l~r} x_l) / d_r - y_r)^2`` over ``0 <= x <= 1`` with
``y_r = rho`` when ``r`` is labeled ``c`` and 0 otherwise.  All colors are
solved at once as the columns of an ``L x d`` matrix.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .base import BaseRepairer, check_in_range, wild_by_fraction
from .graph import WILD, BipartiteGraph


class DivergenceDetected(RuntimeError):
    pass


def averaging_operator(graph: BipartiteGraph) -> sp.csr_matrix:
    """``U`` with ``u_{r,l} = 1/d_r`` on edges; zero rows for isolated right nodes."""
    deg = graph.right_degree.astype(float)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return sp.diags(inv) @ graph.right_adj.astype(float)


def targets(graph: BipartiteGraph, rho=1.0) -> np.ndarray:
    y = np.zeros((graph.right_count, graph.num_colors))
    y[np.arange(graph.right_count), graph.labels] = rho
    y[graph.right_degree == 0] = 0.0
    return y


def loss(graph, x, color=None, rho=1.0, U=None) -> float:
    """Squared residual of the fit; per color if ``color`` is given, else the
    sum over all columns of ``x``."""
    U = averaging_operator(graph) if U is None else U
    y = targets(graph, rho)
    x = np.asarray(x, dtype=float)
    if color is not None:
        if x.ndim == 2:
            x = x[:, color]
        res = U @ x - y[:, color]
    else:
        res = U @ x - y
    return float(np.sum(res * res))


def gradient(graph, x, color=None, rho=1.0, U=None) -> np.ndarray:
    """Analytic gradient ``2 U^T (U x - y)``: each right node sends
    ``(2/d_r)(mean - y_r)`` to its left neighbors, which sum the messages."""
    U = averaging_operator(graph) if U is None else U
    y = targets(graph, rho)
    x = np.asarray(x, dtype=float)
    yy = y if color is None else y[:, color]
    if color is not None and x.ndim == 2:
        x = x[:, color]
    return 2.0 * (U.T @ (U @ x - yy))


def safe_step(graph: BipartiteGraph) -> float:
    """Inverse of a row-sum bound on the Hessian ``2 U^T U``."""
    deg = graph.right_degree.astype(float)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    bound = 2.0 * (graph.left_adj @ inv).max(initial=0.0)
    return 1.0 / bound if bound > 0 else 1.0


class GradientRepairer(BaseRepairer):
    """Projected gradient descent on the per-color quadratic fit.

    ``step_size=None`` uses :func:`safe_step`, which guarantees a monotone
    objective.  If the objective rises for ``patience`` consecutive sweeps the
    step is halved (``on_divergence="halve"``) or :class:`DivergenceDetected`
    is raised (``"raise"``).

    Right-node scores are ``U x`` normalized per node.  A node whose largest
    normalized score is below ``wild_threshold`` is wild; alternatively
    ``wild_fraction`` marks that share of nodes with the lowest scores wild.
    """

    name = "grd"

    def __init__(self, step_size=None, rho=1.0, tol=0.05, max_sweeps=2000,
                 renormalize=False, wild_threshold=0.4, wild_fraction=None,
                 init=0.0, patience=5, on_divergence="halve"):
        self.step_size = step_size
        self.rho = rho
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.renormalize = renormalize
        self.wild_threshold = wild_threshold
        self.wild_fraction = wild_fraction
        self.init = init
        self.patience = patience
        self.on_divergence = on_divergence

    def _validate_params(self):
        if self.step_size is not None:
            check_in_range("step_size", self.step_size, low=0, low_open=True)
        check_in_range("rho", self.rho, low=0, high=1, low_open=True)
        check_in_range("max_sweeps", self.max_sweeps, low=1)
        check_in_range("wild_threshold", self.wild_threshold, low=0, high=1)
        if self.wild_fraction is not None:
            check_in_range("wild_fraction", self.wild_fraction, low=0, high=1)
        if self.on_divergence not in ("halve", "raise"):
            raise ValueError("on_divergence must be 'halve' or 'raise'")

    def _fit(self, graph):
        U = averaging_operator(graph)
        Ut = U.T.tocsr()
        # y is one-hot, so it is subtracted in place at the labeled cells
        hit = np.flatnonzero(graph.right_degree > 0)
        hit_cols = graph.labels[hit]
        rho = float(self.rho)

        def residual(x):
            res = U @ x
            res[hit, hit_cols] -= rho
            return res

        eta = safe_step(graph) if self.step_size is None else float(self.step_size)
        if np.isscalar(self.init):
            x = np.full((graph.left_count, graph.num_colors), float(self.init))
        else:
            x = np.array(self.init, dtype=float).reshape(graph.left_count, graph.num_colors)
        np.clip(x, 0.0, 1.0, out=x)

        res = residual(x)
        obj = float(np.vdot(res, res))
        trace = [obj]
        rises = 0
        halvings = 0
        for _ in range(self.max_sweeps):
            step = Ut @ res
            step *= 2.0 * eta
            x -= step
            np.clip(x, 0.0, 1.0, out=x)
            if self.renormalize:
                s = x.sum(axis=1, keepdims=True)
                np.divide(x, s, out=x, where=s > 0)
            res = residual(x)
            new = float(np.vdot(res, res))
            trace.append(new)
            if new > obj:
                rises += 1
                if rises >= self.patience:
                    if self.on_divergence == "raise":
                        raise DivergenceDetected(f"objective rose {rises} sweeps in a row at step {eta}")
                    eta /= 2.0
                    halvings += 1
                    rises = 0
            else:
                rises = 0
                if obj - new <= self.tol * obj or new < 1e-14:
                    obj = new
                    break
            obj = new

        self.left_scores_ = x
        self.objective_trace_ = np.array(trace)
        self.step_size_ = eta
        self.n_halvings_ = halvings
        scores = U @ x
        total = scores.sum(axis=1, keepdims=True)
        norm = np.divide(scores, total, out=np.zeros_like(scores), where=total > 0)
        self.right_scores_ = norm
        self.right_loss_ = np.sum(res * res, axis=1)
        top = norm.max(axis=1) if graph.num_colors else np.zeros(graph.right_count)
        verdict = np.argmax(norm, axis=1).astype(np.int64)
        if self.wild_fraction is not None:
            wild = wild_by_fraction(top, self.wild_fraction)
        else:
            wild = top < self.wild_threshold
        isolated = graph.right_degree == 0
        verdict[wild] = WILD
        verdict[isolated | (total[:, 0] == 0)] = graph.labels[isolated | (total[:, 0] == 0)]
        return verdict
