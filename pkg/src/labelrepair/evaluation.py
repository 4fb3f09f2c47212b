"""Confusion tables for repair verdicts against ground truth."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .base import check_verdicts
from .graph import WILD, BipartiteGraph, GroundTruth

COLUMNS = ("A", "T", "W", "W:W", "M:W", "N:W", "P", "N:P", "M:P", "W:P",
           "R", "C:R", "M:R", "W:R", "N:R", "Wk", "Str")
_COUNT_COLUMNS = {"T", "W", "P", "R"}


class CountMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionReport:
    A: str
    T: float
    W: int
    WW: float
    MW: float
    NW: float
    P: int
    NP: float
    MP: float
    WP: float
    R: int
    CR: float
    MR: float
    WR: float
    NR: float
    Wk: float
    Str: float

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def as_dict(self) -> dict:
        return dict(zip(COLUMNS, self.values()))


def _frac(num, den):
    return num / den if den else 0.0


def judge(assigned, graph: BipartiteGraph, truth: GroundTruth, name: str = "",
          elapsed: float = 0.0) -> ConfusionReport:
    """Tabulate verdict class against true category for every right node."""
    try:
        assigned = check_verdicts(assigned, graph)
    except ValueError as exc:
        raise CountMismatch(str(exc)) from None
    labels = np.asarray(graph.labels)
    true = truth.true_right_color
    if true.shape != labels.shape:
        raise CountMismatch("truth does not match the graph")

    t_wild = true == WILD
    t_norm = (~t_wild) & (true == labels)
    t_mis = (~t_wild) & ~t_norm

    v_wild = assigned == WILD
    v_prior = assigned == labels
    v_relab = ~v_wild & ~v_prior
    relab_ok = v_relab & (assigned == true)

    W, P, R = int(v_wild.sum()), int(v_prior.sum()), int(v_relab.sum())
    weak = (t_norm & v_prior) | ((t_wild | t_mis) & (v_wild | v_relab))
    strong = (t_norm & v_prior) | (t_wild & v_wild) | relab_ok
    n = len(labels)
    return ConfusionReport(
        A=name, T=float(elapsed),
        W=W,
        WW=_frac((v_wild & t_wild).sum(), W),
        MW=_frac((v_wild & t_mis).sum(), W),
        NW=_frac((v_wild & t_norm).sum(), W),
        P=P,
        NP=_frac((v_prior & t_norm).sum(), P),
        MP=_frac((v_prior & t_mis).sum(), P),
        WP=_frac((v_prior & t_wild).sum(), P),
        R=R,
        CR=_frac((relab_ok & t_mis).sum(), R),
        MR=_frac((v_relab & t_mis & ~relab_ok).sum(), R),
        WR=_frac((v_relab & t_wild).sum(), R),
        NR=_frac((v_relab & t_norm).sum(), R),
        Wk=_frac(weak.sum(), n),
        Str=_frac(strong.sum(), n),
    )


def _fmt(col, value):
    if col == "A":
        return str(value)
    if col == "T":
        return str(int(round(value)))
    if col in _COUNT_COLUMNS:
        return f"{value:g}" if isinstance(value, float) and not value.is_integer() else str(int(value))
    return f"{value:.2f}"


def to_tsv(reports, precise=False) -> str:
    lines = ["\t".join(COLUMNS)]
    for rep in reports:
        vals = rep.values()
        if precise:
            cells = [str(v) if c == "A" else (f"{v:.3f}" if c == "T" else repr(v))
                     for c, v in zip(COLUMNS, vals)]
        else:
            cells = [_fmt(c, v) for c, v in zip(COLUMNS, vals)]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def to_text(reports, title: str = "") -> str:
    head = (title,) + COLUMNS if title else COLUMNS
    rows = []
    for i, rep in enumerate(reports):
        cells = tuple(_fmt(c, v) for c, v in zip(COLUMNS, rep.values()))
        rows.append(((str(i),) if title else ()) + cells)
    widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
    fmt = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))
    return "\n".join([fmt(head)] + [fmt(r) for r in rows]) + "\n"


def aggregate(reports):
    """Per-cell mean and standard deviation across repeated runs of one
    algorithm.  Returns ``(mean_report, std_report)``."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to aggregate")
    names = {r.A for r in reports}
    if len(names) != 1:
        raise ValueError("aggregate expects reports of a single algorithm")
    arr = np.array([r.values()[1:] for r in reports], dtype=float)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0, ddof=1) if len(reports) > 1 else np.zeros_like(mean)
    name = reports[0].A
    return (ConfusionReport(name, *mean.tolist()), ConfusionReport(name, *std.tolist()))


def to_tsv_with_spread(pairs) -> str:
    """TSV with the mean of every cell followed by ``<col>_sd`` columns."""
    cols = list(COLUMNS) + [f"{c}_sd" for c in COLUMNS[1:]]
    lines = ["\t".join(cols)]
    for mean, std in pairs:
        cells = [mean.A] + [f"{v:.4f}" for v in mean.values()[1:]] + \
                [f"{v:.4f}" for v in std.values()[1:]]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def conditional_sums(rep: ConfusionReport) -> dict:
    """Sums of each verdict-conditioned block, ``nan`` when the block is empty."""
    return {
        "W": rep.WW + rep.MW + rep.NW if rep.W else math.nan,
        "P": rep.NP + rep.MP + rep.WP if rep.P else math.nan,
        "R": rep.CR + rep.MR + rep.WR + rep.NR if rep.R else math.nan,
    }
