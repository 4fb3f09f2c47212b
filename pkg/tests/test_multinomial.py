import numpy as np
import pytest

from labelrepair.graph import build_graph
from labelrepair.multinomial import (MultinomialRepairer, _draw, fixed_point_residual,
                                     iteration_rng)

from conftest import conflict_free, random_graph


def test_reproducible(rng):
    g = random_graph(rng, max_left=10, max_right=10, density=0.4, min_nodes=4)
    a = MultinomialRepairer(n_iter=30, seed=5).fit(g)
    b = MultinomialRepairer(n_iter=30, seed=5).fit(g)
    assert np.array_equal(a.verdicts_, b.verdicts_)
    assert np.array_equal(a.right_counts_, b.right_counts_)
    c = MultinomialRepairer(n_iter=30, seed=6).fit(g)
    assert not np.array_equal(a.right_counts_, c.right_counts_)


def test_conflict_free_keeps_labels():
    g = conflict_free(d=4, per_color=6, left_per_color=4)
    est = MultinomialRepairer(n_iter=50, seed=1).fit(g)
    assert (est.verdicts_ == g.labels).mean() >= 0.99


def test_closed_single_node():
    g = build_graph(1, 1, 3, [], [2])
    est = MultinomialRepairer(mu=1.0, lam=0.5, n_iter=20).fit(g)
    counts = est.right_counts_[0]
    assert counts[3] == 1.0 + 10 * 0.5
    assert counts[:3].sum() == 0
    assert est.verdicts_[0] == 2


def test_mass_bookkeeping(rng):
    g = random_graph(rng, max_left=8, max_right=8, density=0.5, min_nodes=3)
    mu, lam = 0.25, 0.125
    est = MultinomialRepairer(mu=mu, lam=lam, n_iter=6, seed=3, wild_messages=False).fit(g)
    # no node is silent once it holds mass: right nodes start positive
    deg_floor = np.maximum(g.right_degree, 1)
    odd = g.right_degree.sum()
    assert est.mass_trace_[0] == odd
    for it in range(1, 6, 2):
        assert est.mass_trace_[it] == pytest.approx(g.left_degree[g.left_degree > 0].sum()
                                                    + lam * deg_floor.sum())
    assert np.all(est.left_counts_.sum(axis=1)[g.left_degree > 0] > 0)


def test_left_nodes_positive_after_first_iteration(rng):
    g = random_graph(rng, max_left=10, max_right=10, density=0.4, min_nodes=4)
    est = MultinomialRepairer(n_iter=1).fit(g)
    assert np.all(est.left_counts_.sum(axis=1)[g.left_degree > 0] > 0)


def test_monochromatic_star_majority():
    # centre right node plus five leaves that all share its color
    edges = [(l, 0) for l in range(5)] + [(l, l + 1) for l in range(5)]
    g = build_graph(5, 6, 3, edges, [1] * 6)
    agree = sum(
        MultinomialRepairer(n_iter=50, seed=s, wild_messages=False).fit(g).verdicts_[0] == 1
        for s in range(100))
    assert agree >= 95


def test_residual_trends_down():
    g = conflict_free(d=3, per_color=8, left_per_color=6)
    est = MultinomialRepairer(n_iter=120, seed=2).fit(g)
    r = est.residual_trace_
    assert np.median(r[-10:]) <= np.median(r[:10])
    assert fixed_point_residual(g, est.right_counts_, est.left_counts_) == r[-1]


def test_draw_handles_silent_and_wild_nodes():
    counts = np.array([[0, 0, 0], [2.0, 0, 0], [0, 3.0, 1.0]])
    sym = _draw(counts, iteration_rng(0, 1, 0), np.array([0.5, 0.5]), True)
    assert sym[0] == -1 and sym[1] == 0 and sym[2] in (0, 1, 2)
    plain = _draw(counts, iteration_rng(0, 1, 0), None, False)
    assert plain[0] == -1 and plain[1] == 0


def test_streams_are_independent_of_order():
    a = iteration_rng(7, 3, 1).random(4)
    iteration_rng(7, 2, 0).random(100)
    assert np.array_equal(a, iteration_rng(7, 3, 1).random(4))


def test_bad_params():
    with pytest.raises(ValueError):
        MultinomialRepairer(n_iter=0).fit(conflict_free())
