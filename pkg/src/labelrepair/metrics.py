"""Difficulty metrics for a labeled bipartite graph."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import BipartiteGraph

COLUMNS = ("Edges", "LAvg", "LMax", "RAvg", "RMax", "ColorDeg", "Comps", "SNR")


@dataclass(frozen=True)
class DifficultyReport:
    color_histogram: tuple
    left_degree_mean: float
    left_degree_max: int
    right_degree_mean: float
    right_degree_max: int
    component_count: int
    avg_color_degree: float
    snr_2path: float
    edge_count: int

    def row(self) -> dict:
        return {
            "Edges": self.edge_count,
            "LAvg": round(self.left_degree_mean, 2),
            "LMax": self.left_degree_max,
            "RAvg": round(self.right_degree_mean, 2),
            "RMax": self.right_degree_max,
            "ColorDeg": round(self.avg_color_degree, 2),
            "Comps": self.component_count,
            "SNR": round(self.snr_2path, 2),
        }

    def as_dict(self) -> dict:
        return asdict(self)


def _left_color_counts(graph: BipartiteGraph) -> sp.csr_matrix:
    # L x d: number of right neighbors of each left node carrying each label
    return (graph.left_adj.astype(np.int64) @ graph.label_onehot().astype(np.int64)).tocsr()


def snr_2path(graph: BipartiteGraph) -> float:
    """Fraction of ordered paths r -> l -> r' (r' != r) whose endpoints carry
    the same proposed label.  Defined as 1 when there are no such paths."""
    counts = _left_color_counts(graph)
    deg = graph.left_degree.astype(np.int64)
    total = int(np.sum(deg * (deg - 1)))
    if total == 0:
        return 1.0
    c = counts.data.astype(np.int64)
    same = int(np.sum(c * (c - 1)))
    return same / total


def avg_color_degree(graph: BipartiteGraph) -> float:
    counts = _left_color_counts(graph)
    distinct = np.diff(counts.indptr)
    used = graph.left_degree > 0
    return float(distinct[used].mean()) if used.any() else 0.0


def component_count(graph: BipartiteGraph) -> int:
    n = graph.left_count + graph.right_count
    if n == 0:
        return 0
    a = graph.right_adj
    full = sp.bmat([[None, a.T], [a, None]], format="csr",
                   dtype=np.int8) if graph.edge_count else sp.csr_matrix((n, n))
    k, _ = connected_components(full, directed=False)
    return int(k)


def snr_estimate(omega: float, lam: float, alpha: float) -> float:
    """Lower-bound estimate of the 2-path SNR from the three error rates."""
    for v in (omega, lam, alpha):
        if not 0.0 <= v <= 1.0:
            raise ValueError("error rates must lie in [0, 1]")
    return ((1 - lam) * (1 - alpha) * (1 - omega)) ** 2


def difficulty(graph: BipartiteGraph) -> DifficultyReport:
    hist = np.bincount(graph.labels, minlength=graph.num_colors)
    ld, rd = graph.left_degree, graph.right_degree
    return DifficultyReport(
        color_histogram=tuple(int(x) for x in hist),
        left_degree_mean=float(ld.mean()) if ld.size else 0.0,
        left_degree_max=int(ld.max()) if ld.size else 0,
        right_degree_mean=float(rd.mean()) if rd.size else 0.0,
        right_degree_max=int(rd.max()) if rd.size else 0,
        component_count=component_count(graph),
        avg_color_degree=avg_color_degree(graph),
        snr_2path=snr_2path(graph),
        edge_count=graph.edge_count,
    )


def format_rows(named_reports) -> str:
    """Aligned text table, one row per ``(name, report)``."""
    head = ("SetID",) + COLUMNS
    body = [(name,) + tuple(str(v) for v in rep.row().values()) for name, rep in named_reports]
    widths = [max(len(str(r[i])) for r in [head] + body) for i in range(len(head))]
    fmt = lambda r: "  ".join(str(v).rjust(w) for v, w in zip(r, widths))
    return "\n".join([fmt(head)] + [fmt(r) for r in body])
