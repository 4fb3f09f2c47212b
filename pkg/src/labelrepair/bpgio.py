"""Line-oriented ``.bpg`` interchange format.

::

    bpg v1 <L> <R> <d>
    # key=value            (optional metadata, sorted by key)
    label <r> <c>          (one per right node)
    edge <l> <r>
    truth                  (optional section)
    rtrue <r> <c|wild>
    ltrue <l> <c>
    misattr <l> <r>

Within each section lines are sorted by their integer fields, so the output
depends only on the graph, never on the order edges were supplied in.
"""
from __future__ import annotations

import io
import os

import numpy as np

from .graph import WILD, BipartiteGraph, GraphError, GroundTruth, build_graph

FORMAT_VERSION = "v1"


class ParseError(GraphError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class VersionMismatch(ParseError):
    pass


def dumps(graph: BipartiteGraph, truth: GroundTruth | None = None,
          meta: dict | None = None) -> str:
    out = io.StringIO()
    w = out.write
    w(f"bpg {FORMAT_VERSION} {graph.left_count} {graph.right_count} {graph.num_colors}\n")
    for key in sorted(meta or {}):
        value = str(meta[key])
        if "\n" in value or "=" in str(key):
            raise ValueError(f"metadata entry {key!r} is not representable")
        w(f"# {key}={value}\n")
    for r, c in enumerate(graph.labels):
        w(f"label {r} {c}\n")
    for l, r in graph.edges():
        w(f"edge {l} {r}\n")
    if truth is not None:
        truth.validate(graph)
        w("truth\n")
        for r, c in enumerate(truth.true_right_color):
            w(f"rtrue {r} {'wild' if c == WILD else c}\n")
        for l, c in enumerate(truth.true_left_color):
            w(f"ltrue {l} {c}\n")
        for l, r in truth.misattributed_edges:
            w(f"misattr {l} {r}\n")
    return out.getvalue()


def serialize(graph, truth=None, meta=None) -> bytes:
    return dumps(graph, truth, meta).encode("ascii")


def _ints(line_no, parts, n):
    if len(parts) != n + 1:
        raise ParseError(line_no, f"expected {n} fields after {parts[0]!r}, got {len(parts) - 1}")
    try:
        return [int(p) for p in parts[1:]]
    except ValueError:
        raise ParseError(line_no, "non-integer field") from None


def loads(text: str):
    """Parse ``.bpg`` text into ``(graph, truth_or_None, meta)``."""
    lines = text.split("\n")
    if not text:
        raise ParseError(1, "empty input")
    if lines[-1] != "":
        raise ParseError(len(lines), "truncated line (missing newline)")
    lines = lines[:-1]

    head = lines[0].split()
    if len(head) < 2 or head[0] != "bpg":
        raise ParseError(1, "missing 'bpg' header")
    if head[1] != FORMAT_VERSION:
        raise VersionMismatch(1, f"unsupported version {head[1]!r}")
    L, R, d = _ints(1, ["bpg"] + head[2:], 3)

    meta = {}
    labels = np.full(R, -1, dtype=np.int64)
    edges = []
    rtrue = ltrue = None
    misattr = []
    in_truth = False
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            raise ParseError(i, "blank line")
        if raw.startswith("#"):
            body = raw[1:].strip()
            if "=" not in body:
                raise ParseError(i, "metadata comment without '='")
            k, v = body.split("=", 1)
            meta[k] = v
            continue
        parts = raw.split()
        kind = parts[0]
        if kind == "label" and not in_truth:
            r, c = _ints(i, parts, 2)
            if not (0 <= r < R) or not (0 <= c < d):
                raise ParseError(i, "label id out of range")
            labels[r] = c
        elif kind == "edge" and not in_truth:
            l, r = _ints(i, parts, 2)
            if not (0 <= l < L and 0 <= r < R):
                raise ParseError(i, "edge id out of range")
            edges.append((l, r))
        elif kind == "truth" and not in_truth:
            if len(parts) != 1:
                raise ParseError(i, "'truth' takes no fields")
            in_truth = True
            rtrue = np.full(R, -2, dtype=np.int64)
            ltrue = np.full(L, -2, dtype=np.int64)
        elif kind == "rtrue" and in_truth:
            if len(parts) != 3:
                raise ParseError(i, "rtrue needs 2 fields")
            r = _ints(i, parts[:2], 1)[0]
            if parts[2] == "wild":
                c = WILD
            else:
                c = _ints(i, parts, 2)[1]
                if not 0 <= c < d:
                    raise ParseError(i, "color out of range")
            if not 0 <= r < R:
                raise ParseError(i, "right id out of range")
            rtrue[r] = c
        elif kind == "ltrue" and in_truth:
            l, c = _ints(i, parts, 2)
            if not (0 <= l < L and 0 <= c < d):
                raise ParseError(i, "ltrue id out of range")
            ltrue[l] = c
        elif kind == "misattr" and in_truth:
            misattr.append(tuple(_ints(i, parts, 2)))
        else:
            raise ParseError(i, f"unexpected record {kind!r}")

    end = len(lines) + 1
    if np.any(labels < 0):
        raise ParseError(end, f"missing label for right node {int(np.argmax(labels < 0))}")
    graph = build_graph(L, R, d, edges, labels)
    truth = None
    if in_truth:
        if np.any(rtrue == -2):
            raise ParseError(end, "incomplete rtrue section")
        if np.any(ltrue == -2):
            raise ParseError(end, "incomplete ltrue section")
        truth = GroundTruth(rtrue, ltrue, np.array(misattr, dtype=np.int64).reshape(-1, 2))
        try:
            truth.validate(graph)
        except GraphError as exc:
            raise ParseError(end, str(exc)) from None
    return graph, truth, meta


def deserialize(data: bytes):
    return loads(data.decode("ascii"))


def save(path, graph, truth=None, meta=None) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(graph, truth, meta))


def load(path):
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        return deserialize(fh.read())
