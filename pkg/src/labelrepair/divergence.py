"""Jensen-Shannon divergence in bits."""
from __future__ import annotations

import numpy as np
from scipy.special import rel_entr


class DimensionMismatch(ValueError):
    pass


def jsd(p, q) -> np.ndarray:
    """Base-2 Jensen-Shannon divergence, in ``[0, 1]``.

    ``p`` may be one distribution or a stack of them (rows); ``q`` broadcasts
    against it.  Zero entries follow ``0 log 0 = 0``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != q.shape[-1]:
        raise DimensionMismatch(f"dimensions differ: {p.shape[-1]} vs {q.shape[-1]}")
    m = 0.5 * (p + q)
    val = 0.5 * (rel_entr(p, m).sum(axis=-1) + rel_entr(q, m).sum(axis=-1)) / np.log(2.0)
    return np.clip(val, 0.0, 1.0)


def label_distribution(graph) -> np.ndarray:
    counts = np.bincount(graph.labels, minlength=graph.num_colors).astype(float)
    total = counts.sum()
    return counts / total if total else np.full(graph.num_colors, 1.0 / graph.num_colors)
