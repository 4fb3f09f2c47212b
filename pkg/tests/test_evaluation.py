import math

import numpy as np
import pytest

from labelrepair.evaluation import (COLUMNS, CountMismatch, aggregate, conditional_sums, judge,
                                    to_text, to_tsv, to_tsv_with_spread)
from labelrepair.generators import GenParams, generate
from labelrepair.graph import WILD, GroundTruth, build_graph


def hand_case(labels, true, assigned):
    g = build_graph(1, len(labels), 3, [], labels)
    t = GroundTruth(np.array(true), np.zeros(1, dtype=int), np.empty((0, 2), dtype=int))
    return judge(np.array(assigned), g, t, "x")


def test_six_node_table():
    # N->P, M->P, W->P, M->correct R, N->W, W->R
    rep = hand_case(labels=[0, 1, 2, 1, 0, 1],
                    true=[0, 0, WILD, 2, 0, WILD],
                    assigned=[0, 1, 2, 2, WILD, 0])
    assert (rep.W, rep.P, rep.R) == (1, 3, 2)
    assert (rep.WW, rep.MW, rep.NW) == (0, 0, 1)
    assert (rep.NP, rep.MP, rep.WP) == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert (rep.CR, rep.MR, rep.WR, rep.NR) == (0.5, 0, 0.5, 0)
    assert rep.Wk == pytest.approx(3 / 6) and rep.Str == pytest.approx(2 / 6)


def test_remaining_cells():
    # M->W, W->W, M->wrong R, N->R
    rep = hand_case(labels=[0, 1, 0, 2], true=[1, WILD, 1, 2], assigned=[WILD, WILD, 2, 0])
    assert (rep.WW, rep.MW, rep.NW) == (0.5, 0.5, 0)
    assert (rep.CR, rep.MR, rep.WR, rep.NR) == (0, 0.5, 0, 0.5)
    assert rep.Wk == 0.75 and rep.Str == 0.25


def test_trivial_and_perfect():
    g, t = generate("circle", GenParams(num_colors=6, left_count=200, right_count=100, seed=1))
    rep = judge(g.labels, g, t)
    assert rep.W == rep.R == 0 and rep.P == 100
    assert rep.Wk == rep.Str == rep.NP
    perfect = judge(t.true_right_color, g, t)
    assert perfect.Wk == perfect.Str == 1


def test_all_wild():
    g, t = generate("circle", GenParams(num_colors=6, left_count=200, right_count=100, seed=2))
    rep = judge(np.full(100, WILD), g, t)
    assert rep.WW == pytest.approx(0.15)
    anomalous = (t.wild_mask | t.mislabel_mask(g)).mean()
    assert rep.Wk == pytest.approx(anomalous)
    assert rep.Str == pytest.approx(0.15)


def test_blocks_sum_to_one_and_order(rng):
    g, t = generate("circle", GenParams(num_colors=6, left_count=200, right_count=100, seed=3))
    for _ in range(20):
        assigned = rng.integers(-1, 6, size=100)
        rep = judge(assigned, g, t)
        for v in conditional_sums(rep).values():
            assert math.isnan(v) or v == pytest.approx(1, abs=1e-9)
        assert 0 <= rep.Str <= rep.Wk <= 1
        assert rep.W + rep.P + rep.R == 100


def test_permutation_invariance(rng):
    g, t = generate("circle", GenParams(num_colors=6, left_count=200, right_count=100, seed=4))
    assigned = rng.integers(-1, 6, size=100)
    perm = rng.permutation(100)
    g2 = build_graph(200, 100, 6, [(l, np.argsort(perm)[r]) for l, r in g.edges()], g.labels[perm])
    t2 = GroundTruth(t.true_right_color[perm], t.true_left_color, np.empty((0, 2), dtype=int))
    assert judge(assigned, g, t).values() == judge(assigned[perm], g2, t2).values()


def test_count_mismatch():
    g = build_graph(1, 2, 2, [], [0, 1])
    t = GroundTruth(np.array([0, 1]), np.zeros(1, dtype=int), np.empty((0, 2), dtype=int))
    with pytest.raises(CountMismatch):
        judge(np.array([0]), g, t)


def test_formatters():
    rep = hand_case([0, 1], [0, 1], [0, 1])
    tsv = to_tsv([rep])
    assert tsv.splitlines()[0].split("\t") == list(COLUMNS)
    assert tsv.splitlines()[1].split("\t")[-2:] == ["1.00", "1.00"]
    text = to_text([rep, rep])
    assert len(text.splitlines()) == 3
    assert text.splitlines()[0].split() == list(COLUMNS)


def test_aggregate():
    a = hand_case([0, 1], [0, 1], [0, 1])
    b = hand_case([0, 1], [0, 1], [0, WILD])
    mean, std = aggregate([a, b])
    assert mean.Str == 0.75 and std.Str == pytest.approx(np.std([1, 0.5], ddof=1))
    out = to_tsv_with_spread([(mean, std)])
    assert out.splitlines()[0].endswith("Str_sd")
    other = judge(np.array([0]), build_graph(1, 1, 3, [], [0]),
                  GroundTruth(np.array([0]), np.zeros(1, dtype=int), np.empty((0, 2), dtype=int)), "y")
    with pytest.raises(ValueError):
        aggregate([a, other])
