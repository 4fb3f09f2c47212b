"""Harmonic label propagation by absorbing random walks.

A walk at right node ``r`` is absorbed into ``r``'s auxiliary node (carrying
its proposed label) with probability ``p`` and otherwise moves to a uniform
left neighbor; a walk at a left node moves to a uniform right neighbor.
``phi[v, c]`` is the probability of absorption in color ``c`` starting at
``v``.  Message passing approaches ``phi`` from below.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .base import BaseRepairer, check_in_range, wild_by_fraction
from .divergence import jsd, label_distribution
from .graph import WILD, BipartiteGraph


class SingularSystem(RuntimeError):
    pass


class BoundViolation(AssertionError):
    pass


def _mean_operators(graph):
    rd = graph.right_degree.astype(float)
    ld = graph.left_degree.astype(float)
    r_inv = np.divide(1.0, rd, out=np.zeros_like(rd), where=rd > 0)
    l_inv = np.divide(1.0, ld, out=np.zeros_like(ld), where=ld > 0)
    to_right = (sp.diags(r_inv) @ graph.right_adj.astype(float)).tocsr()
    to_left = (sp.diags(l_inv) @ graph.left_adj.astype(float)).tocsr()
    return to_right, to_left


def _boundary(graph):
    e = np.zeros((graph.right_count, graph.num_colors))
    e[np.arange(graph.right_count), graph.labels] = 1.0
    return e


def propagate(graph: BipartiteGraph, p=1.0 / 12, max_half_steps=2000, tol=1e-9,
              check_bound=True, dtype=np.float64):
    """Run the half-step iteration.

    Returns ``(phi_right, phi_left, deficit_trace)`` where the trace holds the
    largest per-node deficit ``1 - sum_c phi`` after every half-step.  Isolated
    left nodes are never absorbed and are left out of the deficit.

    Row sums obey the same recurrence as every color column, so they are
    tracked in a float64 vector alongside ``phi``.  That lets ``phi`` itself
    live in a narrower ``dtype`` without blurring the stopping rule.
    """
    to_right, to_left = _mean_operators(graph)
    R, L, d = graph.right_count, graph.left_count, graph.num_colors
    rows, cols = np.arange(R), graph.labels
    iso_r = graph.right_degree == 0
    live_l = graph.left_degree > 0
    tr, tl = to_right.astype(dtype), to_left.astype(dtype)
    phi_r = np.zeros((R, d), dtype=dtype)
    phi_l = np.zeros((L, d), dtype=dtype)
    sum_r, sum_l = np.zeros(R), np.zeros(L)
    trace = []
    for step in range(1, max_half_steps + 1):
        if step % 2:
            phi_r = tr @ phi_l
            phi_r *= dtype(1.0 - p)
            phi_r[rows, cols] += dtype(p)
            phi_r[iso_r, cols[iso_r]] = 1.0
            sum_r = p + (1.0 - p) * (to_right @ sum_l)
            sum_r[iso_r] = 1.0
            deficit = 1.0 - sum_r
        else:
            phi_l = tl @ phi_r
            sum_l = to_left @ sum_r
            deficit = 1.0 - sum_l[live_l]
        worst = float(deficit.max(initial=0.0))
        trace.append(worst)
        if check_bound:
            # right after half-step 2n-1 and left after 2n both obey (1-p)^n
            n = (step + 1) // 2
            if worst > (1.0 - p) ** n + 1e-12:
                raise BoundViolation(f"deficit {worst} exceeds bound at half-step {step}")
        if step % 2 == 0 and worst < tol and (1.0 - sum_r).max(initial=0.0) < tol:
            break
    if check_bound:
        slack = np.sqrt(np.finfo(dtype).eps)
        drift = max(np.abs(phi_r.sum(axis=1) - sum_r).max(initial=0.0),
                    np.abs(phi_l.sum(axis=1) - sum_l).max(initial=0.0))
        if drift > slack:
            raise BoundViolation(f"row sums drifted {drift} from the tracked totals")
    return phi_r, phi_l, np.array(trace)


def exact_harmonic(graph: BipartiteGraph, p=1.0 / 12):
    """Absorption probabilities from one sparse linear solve.

    The auxiliary edge at ``r`` carries weight ``theta * deg(r)`` with
    ``theta = p / (1 - p)``, which reproduces the walk above.  Returns
    ``(phi_right, phi_left)``.
    """
    R, L, d = graph.right_count, graph.left_count, graph.num_colors
    to_right, to_left = _mean_operators(graph)
    iso_r = graph.right_degree == 0
    stay = np.where(iso_r, 0.0, 1.0 - p)
    top = sp.diags(stay) @ to_right
    P = sp.bmat([[None, top], [to_left, None]], format="csr")
    A = (sp.identity(R + L, format="csr") - P).tocsc()
    h = _boundary(graph)
    b = np.vstack([np.where(iso_r[:, None], h, p * h), np.zeros((L, d))])
    if R + L == 0:
        return np.zeros((0, d)), np.zeros((0, d))
    sol = spsolve(A, b)
    sol = np.asarray(sol).reshape(R + L, d)
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("absorption system is singular")
    return sol[:R], sol[R:]


def dirichlet_energy(graph: BipartiteGraph, phi_right, phi_left, p=1.0 / 12) -> float:
    """Weighted sum of squared differences over graph and auxiliary edges."""
    theta = p / (1.0 - p)
    e = graph.edges()
    diff = phi_left[e[:, 0]] - phi_right[e[:, 1]]
    aux = phi_right - _boundary(graph)
    w_aux = theta * graph.right_degree
    return float(np.sum(diff * diff) + np.sum(w_aux[:, None] * aux * aux))


class HarmonicRepairer(BaseRepairer):
    """Harmonic propagation with a Jensen-Shannon wildness test.

    A right node is wild when the divergence between its normalized
    absorption vector and the proposed-label distribution is below
    ``jsd_threshold``, or, with ``wild_fraction``, when it is among that share
    of nodes with the smallest divergence.

    ``dtype`` is the working precision of the absorption matrix.  float32
    halves the memory traffic of each sweep and is ample for argmax and
    divergence verdicts; use float64 when ``phi_right_`` itself matters.
    """

    name = "hfn"

    def __init__(self, p=1.0 / 12, jsd_threshold=0.15, wild_fraction=None,
                 max_half_steps=2000, tol=1e-9, dtype="float32"):
        self.p = p
        self.jsd_threshold = jsd_threshold
        self.wild_fraction = wild_fraction
        self.max_half_steps = max_half_steps
        self.tol = tol
        self.dtype = dtype

    def _validate_params(self):
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be 'float32' or 'float64'")
        check_in_range("p", self.p, low=0, high=1, low_open=True, high_open=True)
        check_in_range("jsd_threshold", self.jsd_threshold, low=0, high=1)
        check_in_range("max_half_steps", self.max_half_steps, low=2)
        if self.wild_fraction is not None:
            check_in_range("wild_fraction", self.wild_fraction, low=0, high=1)

    def _fit(self, graph):
        phi_r, phi_l, trace = propagate(graph, self.p, self.max_half_steps, self.tol,
                                        dtype=np.dtype(self.dtype).type)
        phi_r, phi_l = phi_r.astype(float), phi_l.astype(float)
        self.phi_right_, self.phi_left_, self.deficit_trace_ = phi_r, phi_l, trace
        total = phi_r.sum(axis=1, keepdims=True)
        norm = np.divide(phi_r, total, out=np.zeros_like(phi_r), where=total > 0)
        div = jsd(norm, label_distribution(graph))
        self.divergence_ = div
        verdict = np.argmax(norm, axis=1).astype(np.int64)
        if self.wild_fraction is not None:
            wild = wild_by_fraction(div, self.wild_fraction)
        else:
            wild = div < self.jsd_threshold
        verdict[wild] = WILD
        iso = graph.right_degree == 0
        verdict[iso] = graph.labels[iso]
        return verdict
