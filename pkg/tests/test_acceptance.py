"""Exit criteria.  Each test prints one ``criterion N: PASS|FAIL`` line."""
from functools import lru_cache

import numpy as np
import pytest

from labelrepair import ALGORITHMS, make_repairer
from labelrepair.evaluation import judge
from labelrepair.fixtures import noisy_example
from labelrepair.generators import (GenParams, empirical_fractions, generate,
                                    sample_pareto_degree)
from labelrepair.gradient import GradientRepairer, gradient, loss
from labelrepair.graph import build_graph
from labelrepair.harmonic import exact_harmonic, propagate
from labelrepair.metrics import snr_2path, snr_estimate
from labelrepair.mincut import build_network, min_cut, penalties
from labelrepair.voting import VotingRepairer

from conftest import conflict_free

pytestmark = pytest.mark.acceptance

SEEDS10 = range(1, 11)
SEEDS20 = range(1, 21)


@lru_cache(maxsize=None)
def instance(model, seed, preset="small", **kw):
    return generate(model, GenParams.preset(preset, seed=seed, **kw))


def run(name, graph, truth, **params):
    est = make_repairer(name, **params).fit(graph)
    return est, judge(est.verdicts_, graph, truth, name, est.fit_time_)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def random_small(rng, max_nodes, max_colors=3, density=None):
    L = int(rng.integers(1, max_nodes))
    R = int(rng.integers(1, max_nodes - L + 1))
    d = int(rng.integers(1, max_colors + 1))
    p = rng.uniform(0.15, 0.7) if density is None else density
    edges = np.argwhere(rng.random((L, R)) < p)
    return build_graph(L, R, d, edges, rng.integers(0, d, size=R))


def test_trivial_baseline(report):
    vals, worst = [], 0.0
    for s in SEEDS10:
        g, t = instance("circle", s)
        _, rep = run("trv", g, t)
        assert rep.Wk == rep.Str == rep.NP
        vals.append(rep.Str)
        worst = max(worst, rep.T)
    ok = all(0.68 <= v <= 0.78 for v in vals) and worst < 5
    report(1, ok, f"TRV Wk=Str=N:P in [{min(vals):.3f}, {max(vals):.3f}], max time {worst:.3f}s")


def test_naive_bayes_headline(report):
    strong, ww, worst = [], [], 0.0
    for s in SEEDS10:
        g, t = instance("circle", s)
        _, rep = run("nba", g, t)
        strong.append(rep.Str)
        ww.append(rep.WW)
        worst = max(worst, rep.T)
    ok = np.mean(strong) >= 0.93 and np.mean(ww) >= 0.95 and worst < 60
    report(2, ok, f"NBA mean Str {np.mean(strong):.3f}, mean W:W {np.mean(ww):.3f}, "
                  f"max time {worst:.2f}s")


def test_ranking_power(report, capsys):
    nba, grd = [], []
    for s in SEEDS10:
        g, t = instance("power", s)
        nba.append(run("nba", g, t)[1].Str)
        grd.append(run("grd", g, t)[1].Str)
    gap = np.mean(nba) - np.mean(grd)
    # the distinct-draw variant of the power model is reported, not judged
    g, t = instance("power", 1, power_draws="distinct")
    alt = run("nba", g, t)[1].Str - run("grd", g, t)[1].Str
    with capsys.disabled():
        print(f"\n  info: distinct power draws, seed 1: NBA Str - GRD Str = {alt:.3f}")
    report(3, gap >= 0.05, f"NBA Str {np.mean(nba):.3f} - GRD Str {np.mean(grd):.3f} = {gap:.3f}")


def brute_force_cut(g, color, pi0=0.75, pi1=0.5):
    R, n = g.right_count, g.right_count + g.left_count
    bits = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    xr, xl = bits[:, :R], bits[:, R:]
    p0, p1 = penalties(g, pi0, pi1)
    in_c = g.labels == color
    e = g.edges()
    cost = (~xr & in_c) @ p0 + (xr & ~in_c) @ p1
    cost = cost + (xl[:, e[:, 0]] != xr[:, e[:, 1]]).sum(axis=1)
    return float(cost.min())


def test_mincut_matches_brute_force(report):
    rng = np.random.default_rng(2024)
    mismatches = checks = 0
    for _ in range(200):
        g = random_small(rng, 12)
        for c in range(g.num_colors):
            value, _ = min_cut(build_network(g, c))
            checks += 1
            mismatches += value != brute_force_cut(g, c)
    report(4, mismatches == 0, f"{checks} color problems on 200 graphs, {mismatches} mismatches")


def test_harmonic_bound_and_oracle(report):
    rng = np.random.default_rng(7)
    fixtures = list(_harmonic_fixtures(rng))
    worst = 0.0
    for g, p in fixtures:
        # propagate raises BoundViolation if any half-step breaks the bound
        phi_r, phi_l, trace = propagate(g, p, max_half_steps=20000, tol=1e-10, check_bound=True)
        n = np.arange(1, len(trace) + 1)
        assert np.all(trace <= (1 - p) ** ((n + 1) // 2) + 1e-12)
        ex_r, ex_l = exact_harmonic(g, p)
        worst = max(worst, np.abs(phi_r - ex_r).max(initial=0), np.abs(phi_l - ex_l).max(initial=0))
    report(5, worst <= 1e-6, f"{len(fixtures)} fixtures, bound held, max |phi - exact| = {worst:.2e}")


def _harmonic_fixtures(rng):
    yield noisy_example()[0], 1 / 12
    yield build_graph(1, 2, 2, [(0, 0), (0, 1)], [0, 1]), 0.5
    yield conflict_free(), 1 / 12
    for _ in range(40):
        L = int(rng.integers(2, 120))
        R = int(rng.integers(2, 200 - L))
        d = int(rng.integers(1, 6))
        deg = rng.uniform(1, 4)
        edges = np.argwhere(rng.random((L, R)) < deg / L)
        yield build_graph(L, R, d, edges, rng.integers(0, d, size=R)), float(rng.uniform(0.05, 0.5))


def test_gradient_correctness(report):
    rng = np.random.default_rng(99)
    worst_rel, rises, h = 0.0, 0, 1e-5
    for _ in range(50):
        g = random_small(rng, 12)
        x = rng.random((g.left_count, g.num_colors))
        for c in range(g.num_colors):
            analytic = gradient(g, x, color=c)
            numeric = np.empty(g.left_count)
            for l in range(g.left_count):
                xp, xm = x.copy(), x.copy()
                xp[l, c] += h
                xm[l, c] -= h
                numeric[l] = (loss(g, xp, color=c) - loss(g, xm, color=c)) / (2 * h)
            scale = np.maximum(np.abs(numeric), 1e-8)
            worst_rel = max(worst_rel, float((np.abs(analytic - numeric) / scale).max(initial=0)))
        est = GradientRepairer(tol=0, max_sweeps=200).fit(g)
        rises += int(np.sum(np.diff(est.objective_trace_) > 1e-12))
    g, _ = instance("circle", 1)
    est = GradientRepairer(tol=0, max_sweeps=100).fit(g)
    rises += int(np.sum(np.diff(est.objective_trace_) > 1e-12))
    ok = worst_rel <= 1e-4 and rises == 0
    report(6, ok, f"max relative gradient error {worst_rel:.2e}, objective rises {rises}")


def test_voting_monotone_and_terminates(report):
    rng = np.random.default_rng(5)
    bad = 0
    for _ in range(100):
        g = random_small(rng, 16)
        est = VotingRepairer(wild_threshold=0).fit(g)
        diffs = np.diff(est.objective_trace_)
        bad += not (est.converged_ and np.all(diffs[:-1] > 0) and diffs[-1] == 0)
    sweeps = {}
    for model in ("sequential", "circle", "power"):
        g, _ = instance(model, 1)
        est = VotingRepairer().fit(g)
        sweeps[model] = est.n_sweeps_ if est.converged_ else None
    ok = bad == 0 and all(s is not None and s <= 100 for s in sweeps.values())
    report(7, ok, f"{bad} non-monotone runs of 100; sweeps to fixed point on small presets {sweeps}")


def test_generator_fidelity(report):
    w_err = m_err = 0.0
    for s in SEEDS20:
        g, t = instance("circle", s)
        w, m = empirical_fractions(g, t)
        w_err, m_err = max(w_err, abs(w - 0.15)), max(m_err, abs(m - 0.15))
    z = sample_pareto_degree(np.random.default_rng(3), 10**6)
    tail = max(abs((z > k).mean() - 1 / k) for k in (2, 4, 8, 16))
    ok = w_err <= 0.02 and m_err <= 0.02 and tail <= 0.01
    report(8, ok, f"max |wild - 0.15| {w_err:.4f}, max |mislabel - 0.15| {m_err:.4f}, "
                  f"max tail error {tail:.4f}")


def test_snr_consistency(report):
    clean = [snr_2path(conflict_free())]
    for s in range(1, 4):
        g, _ = generate("sequential", GenParams(num_colors=10, left_count=600, right_count=200,
                                                omega=0, lam=0, alpha=0, seed=s))
        clean.append(snr_2path(g))
    est = snr_estimate(0.15, 0.15, 0.15)
    slack = min(snr_2path(instance("sequential", s, alpha=0.15)[0]) - est for s in SEEDS20)
    ok = all(v == 1.0 for v in clean) and slack >= -0.03
    report(9, ok, f"conflict-free SNR {set(clean)}, min (snr - estimate) {slack:+.4f}")


@pytest.mark.slow
def test_scaling(report):
    small_g, small_t = instance("circle", 1)
    large_g, large_t = generate("circle", GenParams.preset("large", seed=1))
    ratios, lines = {}, []
    for name in ALGORITHMS:
        t_small = min(run(name, small_g, small_t)[0].fit_time_ for _ in range(3))
        est, rep = run(name, large_g, large_t)
        # sub-10ms small timings are clock noise, so they are floored
        ratios[name] = est.fit_time_ / max(t_small, 0.01)
        lines.append(f"{name} {t_small:.2f}s->{est.fit_time_:.2f}s Str {rep.Str:.2f}")
        if name == "vot":
            assert est.converged_ and est.n_sweeps_ <= 100
    ok = all(r <= 40 for r in ratios.values())
    worst = max(ratios, key=ratios.get)
    report(10, ok, f"max Large/Small time ratio {ratios[worst]:.1f} ({worst}); " + "; ".join(lines))
