import numpy as np
import pytest

from labelrepair.bpgio import ParseError, VersionMismatch, dumps, load, loads, save
from labelrepair.graph import (WILD, GraphError, GroundTruth, LabelCountMismatch, OutOfRangeId,
                               auxiliary_view, build_graph)

from conftest import random_graph


def test_example_shape(example):
    g, truth = example
    assert (g.left_count, g.right_count, g.num_colors) == (11, 11, 3)
    assert g.labels[0] == 2 and g.labels[10] == 0
    assert truth.true_right_color[10] == WILD
    truth.validate(g)


def test_isolated_nodes_are_valid():
    g = build_graph(1, 1, 1, [], [0])
    assert g.edge_count == 0
    assert g.right_degree.tolist() == [0] and g.left_degree.tolist() == [0]


def test_duplicate_edge_stored_once():
    g = build_graph(1, 1, 1, [(0, 0), (0, 0)], [0])
    assert g.edge_count == 1


@pytest.mark.parametrize("edges,labels,err", [
    ([(1, 0)], [0], OutOfRangeId),
    ([(0, 2)], [0], OutOfRangeId),
    ([], [0, 0], LabelCountMismatch),
    ([], [3], OutOfRangeId),
])
def test_build_rejects_bad_input(edges, labels, err):
    with pytest.raises(err):
        build_graph(1, 1, 2, edges, labels)


def test_transpose_consistency(rng):
    for _ in range(20):
        g = random_graph(rng)
        dense_r = g.right_adj.toarray()
        assert np.array_equal(dense_r.T, g.left_adj.toarray())
        for l in range(g.left_count):
            for r in g.left_neighbors(l):
                assert l in g.right_neighbors(r)


def test_auxiliary_view(example):
    g, _ = example
    aux = auxiliary_view(g)
    assert aux.aux_count == aux.aux_edge_count == 11
    assert np.all(aux.aux_degree() == 1)
    assert aux.aux_neighbors(4).tolist() == [4]
    assert np.array_equal(aux.aux_colors, g.labels)
    empty = auxiliary_view(build_graph(2, 0, 1, [], []))
    assert empty.aux_count == 0


def test_truth_rejects_misattributed_wild(example):
    g, truth = example
    bad = GroundTruth(truth.true_right_color, truth.true_left_color,
                      np.array([[8, 10]]))
    assert g.right_adj[10, 8]
    with pytest.raises(GraphError):
        bad.validate(g)


# ------------------------------------------------------------------ .bpg

def test_roundtrip_byte_identical(example, tmp_path):
    g, truth = example
    text = dumps(g, truth, {"note": "x"})
    g2, t2, meta = loads(text)
    assert g2 == g and t2 == truth and meta == {"note": "x"}
    assert dumps(g2, t2, meta) == text
    path = tmp_path / "ex.bpg"
    save(path, g, truth)
    g3, t3, _ = load(path)
    assert g3 == g and t3 == truth


def test_edge_order_does_not_matter(rng, example):
    g, _ = example
    e = g.edges()
    shuffled = build_graph(11, 11, 3, e[rng.permutation(len(e))], g.labels)
    assert dumps(shuffled) == dumps(g)


def test_empty_graph_is_header_only():
    g = build_graph(0, 0, 1, [], [])
    assert dumps(g) == "bpg v1 0 0 1\n"
    assert loads("bpg v1 0 0 1\n")[0] == g


def test_truncated_input(example):
    g, truth = example
    text = dumps(g, truth)
    cut = text[: text.index("edge 3") + 4]
    with pytest.raises(ParseError) as info:
        loads(cut)
    assert info.value.line_no == cut.count("\n") + 1


def test_missing_labels_detected(example):
    g, _ = example
    lines = dumps(g).splitlines(keepends=True)
    text = "".join(l for l in lines if not l.startswith("label 5 "))
    with pytest.raises(ParseError, match="missing label"):
        loads(text)


def test_version_mismatch():
    with pytest.raises(VersionMismatch):
        loads("bpg v9 0 0 1\n")


def test_wild_truth_roundtrip(example):
    g, truth = example
    text = dumps(g, truth)
    assert "rtrue 10 wild\n" in text
    assert loads(text)[1].true_right_color[10] == WILD


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load(tmp_path / "absent.bpg")
