"""Synthetic labeled bipartite graphs with controlled wildness, mislabeling
and misattribution.

Three models are provided: the sequential model (clean blocks, then noise),
the circle model (distance-biased neighborhoods on a circle whose arcs are
the colors) and the circle model with preferential-attachment colors and
heavy-tailed right degrees.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import WILD, GroundTruth, build_graph

log = logging.getLogger(__name__)


class InvalidParams(ValueError):
    pass


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class Exponential:
    rate: float = 20.0

    def __call__(self, delta):
        return np.exp(-self.rate * np.asarray(delta, dtype=float))

    def __str__(self):
        return f"exp:{self.rate:g}"


@dataclass(frozen=True)
class Step:
    radius: float
    inside_weight: float = 1.0
    outside_weight: float = 0.1

    def __post_init__(self):
        if self.outside_weight > self.inside_weight or self.outside_weight < 0:
            raise InvalidParams("step kernel must be non-increasing and non-negative")

    def __call__(self, delta):
        delta = np.asarray(delta, dtype=float)
        return np.where(delta < self.radius, self.inside_weight, self.outside_weight)

    def __str__(self):
        return f"step:{self.radius:g},{self.inside_weight:g},{self.outside_weight:g}"


@dataclass(frozen=True)
class Threshold:
    radius: float

    def __call__(self, delta):
        return (np.asarray(delta, dtype=float) < self.radius).astype(float)

    def __str__(self):
        return f"threshold:{self.radius:g}"


def parse_kernel(text: str):
    """Parse ``exp:RATE``, ``threshold:RADIUS`` or ``step:RADIUS,IN,OUT``."""
    name, _, args = text.partition(":")
    try:
        values = [float(a) for a in args.split(",")] if args else []
        if name in ("exp", "exponential"):
            if len(values) != 1 or values[0] <= 0:
                raise InvalidParams("exp kernel needs one positive rate")
            return Exponential(values[0])
        if name == "threshold":
            return Threshold(*values)
        if name == "step":
            return Step(*values)
    except TypeError as exc:
        raise InvalidParams(f"bad kernel arguments in {text!r}") from exc
    raise InvalidParams(f"unknown kernel {text!r}")


# ---------------------------------------------------------------- params

PRESETS = {
    "small": dict(num_colors=70, left_count=5100, right_count=1700),
    "large": dict(num_colors=350, left_count=25500, right_count=8500),
}


@dataclass(frozen=True)
class GenParams:
    num_colors: int = 70
    left_count: int = 5100
    right_count: int = 1700
    omega: float = 0.15
    lam: float = 0.15
    alpha: float = 0.0
    kernel: object = field(default_factory=Exponential)
    chi: float = 0.25
    left_seed_degree: int = 1
    mean_right_degree: float | None = None
    fraction_mode: str = "exact"
    power_draws: str = "merged"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.kernel, str):
            object.__setattr__(self, "kernel", parse_kernel(self.kernel))
        self.validate()

    def validate(self):
        if self.num_colors < 1:
            raise InvalidParams("num_colors must be >= 1")
        if self.left_count < 0 or self.right_count < 0:
            raise InvalidParams("node counts must be non-negative")
        for name in ("omega", "lam", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1], got {v}")
        if self.chi <= 0:
            raise InvalidParams("chi must be positive")
        if self.left_seed_degree < 0:
            raise InvalidParams("left_seed_degree must be non-negative")
        if self.fraction_mode not in ("exact", "bernoulli"):
            raise InvalidParams("fraction_mode must be 'exact' or 'bernoulli'")
        if self.power_draws not in ("distinct", "merged"):
            raise InvalidParams("power_draws must be 'distinct' or 'merged'")
        if self.mean_right_degree is not None and self.mean_right_degree < 0:
            raise InvalidParams("mean_right_degree must be non-negative")

    @classmethod
    def preset(cls, name: str, **overrides) -> "GenParams":
        try:
            base = dict(PRESETS[name])
        except KeyError:
            raise InvalidParams(f"unknown preset {name!r}") from None
        base.update(overrides)
        return cls(**base)

    def to_config(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = str(v) if f.name == "kernel" else v
        return out

    @classmethod
    def from_config(cls, cfg: dict) -> "GenParams":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for k, v in cfg.items():
            if k not in types:
                raise InvalidParams(f"unknown generator parameter {k!r}")
            if k == "kernel":
                kw[k] = parse_kernel(str(v))
            elif k in ("fraction_mode", "power_draws"):
                kw[k] = str(v)
            elif k == "mean_right_degree":
                kw[k] = None if v in (None, "None", "") else float(v)
            elif k in ("num_colors", "left_count", "right_count", "left_seed_degree", "seed"):
                kw[k] = int(v)
            else:
                kw[k] = float(v)
        return cls(**kw)


# ---------------------------------------------------------------- helpers

def _pick_mask(rng, n, frac, mode):
    """Random subset of ``range(n)`` holding the target fraction."""
    if mode == "exact":
        k = int(round(frac * n))
        mask = np.zeros(n, dtype=bool)
        mask[rng.choice(n, size=k, replace=False)] = True
        return mask
    return rng.random(n) < frac


def _relabel_other(rng, labels, mask, d):
    """Move each masked label to a uniformly chosen *different* color."""
    labels = labels.copy()
    if d < 2:
        return labels
    idx = np.flatnonzero(mask)
    shift = rng.integers(1, d, size=idx.size)
    labels[idx] = (labels[idx] + shift) % d
    return labels


def arc_distance(a, b, circumference):
    diff = np.abs(np.asarray(a)[..., None] - np.asarray(b)[None, ...]) % circumference
    return np.minimum(diff, circumference - diff)


def sample_pareto_degree(rng, size, cap=None):
    """Integer Z >= 1 with P(Z > z) = 1/z for integer z, truncated at ``cap``."""
    u = 1.0 - rng.random(size)  # (0, 1]
    z = np.ceil(1.0 / u)
    if cap is not None:
        z = np.minimum(z, cap)
    return z.astype(np.int64)


def _gumbel_topk(rng, query_pos, cand_pos, circumference, kernel, k, exclude=None,
                 uniform_rows=None, chunk=256):
    """Weighted sampling without replacement, one row per query.

    Row ``i`` draws ``k[i]`` candidates with probability proportional to
    ``kernel(distance)`` (uniform for rows flagged in ``uniform_rows``).
    ``exclude`` is an optional sparse ``query x cand`` mask of forbidden pairs.
    Returns an ``(m, 2)`` array of ``(query, cand)`` pairs.
    """
    m, n = len(query_pos), len(cand_pos)
    k = np.asarray(k, dtype=np.int64)
    out_q, out_c = [], []
    if n == 0 or m == 0:
        return np.empty((0, 2), dtype=np.int64)
    if exclude is not None:
        exclude = exclude.tocsr()
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        kk = np.minimum(k[start:stop], n)
        if kk.max(initial=0) == 0:
            continue
        with np.errstate(divide="ignore"):
            logw = np.log(kernel(arc_distance(query_pos[start:stop], cand_pos, circumference)))
        if uniform_rows is not None:
            logw[uniform_rows[start:stop]] = 0.0
        keys = logw + rng.gumbel(size=logw.shape)
        if exclude is not None:
            blk = exclude[start:stop].tocoo()
            keys[blk.row, blk.col] = -np.inf
        kmax = int(kk.max())
        if kmax < n:
            top = np.argpartition(-keys, kmax - 1, axis=1)[:, :kmax]
        else:
            top = np.broadcast_to(np.arange(n), (stop - start, n))
        topkeys = np.take_along_axis(keys, top, axis=1)
        order = np.argsort(-topkeys, axis=1, kind="stable")
        top = np.take_along_axis(top, order, axis=1)
        topkeys = np.take_along_axis(topkeys, order, axis=1)
        take = (np.arange(kmax)[None, :] < kk[:, None]) & np.isfinite(topkeys)
        rows, cols = np.nonzero(take)
        out_q.append(rows + start)
        out_c.append(top[rows, cols])
    if not out_q:
        return np.empty((0, 2), dtype=np.int64)
    return np.column_stack([np.concatenate(out_q), np.concatenate(out_c)]).astype(np.int64)


def _kernel_draws(rng, query_pos, cand_pos, circumference, kernel, k,
                  uniform_rows=None, chunk=256):
    """Weighted sampling *with* replacement: row ``i`` makes ``k[i]`` independent
    kernel-biased draws.  Repeated pairs are returned once."""
    m, n = len(query_pos), len(cand_pos)
    k = np.asarray(k, dtype=np.int64)
    out = []
    if n == 0 or m == 0:
        return np.empty((0, 2), dtype=np.int64)
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        kk = k[start:stop]
        if kk.max(initial=0) == 0:
            continue
        w = kernel(arc_distance(query_pos[start:stop], cand_pos, circumference)).astype(float)
        if uniform_rows is not None:
            w[uniform_rows[start:stop]] = 1.0
        cdf = np.cumsum(w, axis=1)
        for i in np.flatnonzero(kk):
            if cdf[i, -1] <= 0:
                continue
            u = rng.random(kk[i]) * cdf[i, -1]
            picks = np.unique(np.minimum(np.searchsorted(cdf[i], u, side="right"), n - 1))
            out.append(np.column_stack([np.full(picks.size, start + i), picks]))
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def _finish(params, edges_lr, labels, true_right, true_left, misattr, model, **extra_meta):
    p = params
    graph = build_graph(p.left_count, p.right_count, p.num_colors, edges_lr, labels)
    truth = GroundTruth(true_right, true_left, misattr)
    tame_edges = graph.edge_count - int(graph.right_degree[true_right == WILD].sum())
    truth.meta.update(
        model=model,
        realized_alpha=len(truth.misattributed_edges) / tame_edges if tame_edges else 0.0,
        **extra_meta,
    )
    truth.validate(graph)
    return graph, truth


def _misattributed(edges_lr, true_right, true_left):
    if len(edges_lr) == 0:
        return np.empty((0, 2), dtype=np.int64)
    tr = true_right[edges_lr[:, 1]]
    tl = true_left[edges_lr[:, 0]]
    return edges_lr[(tr != WILD) & (tr != tl)]


# ---------------------------------------------------------------- models

def gen_sequential(params: GenParams):
    """Clean color blocks, then wilds, then edge rewiring, then relabeling."""
    p = params
    rng = np.random.default_rng(p.seed)
    d, L, R = p.num_colors, p.left_count, p.right_count
    if p.omega + p.lam >= 1:
        log.warning("omega + lambda >= 1: little signal is left in the instance")
    mean_deg = 10.0 if p.mean_right_degree is None else p.mean_right_degree

    # 1. disjoint random blocks
    true_left = rng.permutation(np.arange(L) % d)
    wild = _pick_mask(rng, R, p.omega, p.fraction_mode)
    tame = np.flatnonzero(~wild)
    true_right = np.full(R, WILD, dtype=np.int64)
    true_right[tame] = rng.permutation(np.arange(tame.size) % d)
    members = [np.flatnonzero(true_left == c) for c in range(d)]

    neighbors = [None] * R
    for r in tame:
        pool = members[true_right[r]]
        if pool.size == 0:
            neighbors[r] = pool
            continue
        deg = rng.binomial(pool.size, min(1.0, mean_deg / pool.size))
        neighbors[r] = rng.choice(pool, size=deg, replace=False)
    # 2. wilds attach to uniformly random left nodes
    for r in np.flatnonzero(wild):
        deg = rng.binomial(L, min(1.0, mean_deg / L)) if L else 0
        neighbors[r] = rng.choice(L, size=deg, replace=False)

    # 3. rewire each tame edge with probability alpha
    misattr = []
    for r in tame:
        nb = neighbors[r]
        move = rng.random(nb.size) < p.alpha
        if not move.any():
            continue
        kept = nb[~move]
        free = np.setdiff1d(np.arange(L), nb, assume_unique=False)
        k = min(int(move.sum()), free.size)
        new = rng.choice(free, size=k, replace=False)
        neighbors[r] = np.concatenate([kept, new])
        misattr.extend((int(l), int(r)) for l in new)

    # 4. relabel
    labels = true_right.copy()
    labels[wild] = rng.integers(0, d, size=int(wild.sum()))
    mis = np.zeros(R, dtype=bool)
    mis[tame] = _pick_mask(rng, tame.size, p.lam, p.fraction_mode)
    labels = _relabel_other(rng, labels, mis, d)

    edges = [(int(l), r) for r in range(R) for l in neighbors[r]]
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    misattr = np.array(misattr, dtype=np.int64).reshape(-1, 2)
    return _finish(p, edges, labels, true_right, true_left, misattr, "sequential")


def _labels_and_wilds(rng, p, true_color):
    R = true_color.size
    wild = _pick_mask(rng, R, p.omega, p.fraction_mode)
    tame = np.flatnonzero(~wild)
    mis = np.zeros(R, dtype=bool)
    mis[tame] = _pick_mask(rng, tame.size, p.lam, p.fraction_mode)
    labels = _relabel_other(rng, true_color, mis, p.num_colors)
    true_right = np.where(wild, WILD, true_color)
    return wild, labels, true_right


def gen_circle(params: GenParams):
    """Nodes uniform on a circle of circumference ``num_colors``; each arc of
    unit length is one color.  Tame right nodes pick left neighbors with
    probability proportional to the kernel of the arc distance, wild ones
    pick uniformly."""
    p = params
    rng = np.random.default_rng(p.seed)
    d, L, R = p.num_colors, p.left_count, p.right_count
    mean_deg = 11.44 if p.mean_right_degree is None else p.mean_right_degree

    right_pos = rng.uniform(0, d, size=R)
    left_pos = rng.uniform(0, d, size=L)
    true_left = np.minimum(np.floor(left_pos), d - 1).astype(np.int64)
    color = np.minimum(np.floor(right_pos), d - 1).astype(np.int64)
    wild, labels, true_right = _labels_and_wilds(rng, p, color)

    deg = rng.poisson(mean_deg, size=R)
    pairs = _gumbel_topk(rng, right_pos, left_pos, d, p.kernel, deg, uniform_rows=wild)
    edges = pairs[:, ::-1]
    misattr = _misattributed(edges, true_right, true_left)
    return _finish(p, edges, labels, true_right, true_left, misattr, "circle",
                   right_pos=right_pos, left_pos=left_pos)


def preferential_colors(rng, n, d, chi, counts=None):
    """Sequential preferential attachment: color ``j`` is drawn with
    probability proportional to ``count_j + chi``."""
    counts = np.zeros(d) if counts is None else counts.astype(float).copy()
    out = np.empty(n, dtype=np.int64)
    u = rng.random(n)
    for i in range(n):
        w = counts + chi
        c = int(np.searchsorted(np.cumsum(w), u[i] * w.sum(), side="right"))
        c = min(c, d - 1)
        out[i] = c
        counts[c] += 1
    return out


def gen_power_circle(params: GenParams):
    """Circle model with preferential-attachment colors and right degrees
    drawn from P(Z > z) = 1/z."""
    p = params
    rng = np.random.default_rng(p.seed)
    d, L, R = p.num_colors, p.left_count, p.right_count

    color = preferential_colors(rng, R, d, p.chi)
    right_pos = color + rng.random(R)
    left_pos = rng.uniform(0, d, size=L)
    true_left = np.minimum(np.floor(left_pos), d - 1).astype(np.int64)
    wild, labels, true_right = _labels_and_wilds(rng, p, color)

    # step 1: every left node gets a few kernel-chosen right neighbors
    seed_pairs = _gumbel_topk(rng, left_pos, right_pos, d, p.kernel,
                              np.full(L, p.left_seed_degree))
    right_nb = [set() for _ in range(R)]
    left_nb = [set() for _ in range(L)]
    tame_ids = np.flatnonzero(~wild)
    tame_pos = right_pos[tame_ids]
    moved = []
    for l, r in seed_pairs:
        if wild[r]:
            moved.append((int(l), int(r)))
        else:
            right_nb[r].add(int(l))
            left_nb[l].add(int(r))
    tame_index = np.full(R, -1, dtype=np.int64)
    tame_index[tame_ids] = np.arange(tame_ids.size)
    for l, r in moved:
        # the wild node's seed edge goes to a uniform left node; the left node
        # keeps its degree floor through a fresh kernel-chosen tame neighbor
        if len(right_nb[r]) < L:
            while True:
                new_l = int(rng.integers(L))
                if new_l not in right_nb[r]:
                    break
            right_nb[r].add(new_l)
            left_nb[new_l].add(r)
        if tame_ids.size:
            blocked = [tame_index[x] for x in left_nb[l] if tame_index[x] >= 0]
            excl = sp.csr_matrix((np.ones(len(blocked)), (np.zeros(len(blocked), dtype=int), blocked)),
                                 shape=(1, tame_ids.size))
            pick = _gumbel_topk(rng, left_pos[l:l + 1], tame_pos, d, p.kernel, [1], exclude=excl)
            if len(pick):
                r_new = int(tame_ids[pick[0, 1]])
                right_nb[r_new].add(l)
                left_nb[l].add(r_new)
    rows = np.repeat(np.arange(R), [len(s) for s in right_nb])
    cols = np.fromiter((x for s in right_nb for x in sorted(s)), dtype=np.int64, count=rows.size)
    adj = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(R, L))

    # step 2: top up each right node to a heavy-tailed degree
    z = sample_pareto_degree(rng, R, cap=L)
    current = np.diff(adj.indptr)
    extra = np.maximum(z - current, 0)
    if p.power_draws == "merged":
        # z kernel draws with replacement; repeats and seed edges merge
        more = _kernel_draws(rng, right_pos, left_pos, d, p.kernel, z, uniform_rows=wild)
    else:
        more = _gumbel_topk(rng, right_pos, left_pos, d, p.kernel, extra,
                            exclude=adj, uniform_rows=wild)
    edges = np.concatenate([np.column_stack([cols, rows]), more[:, ::-1]]).astype(np.int64)
    edges = np.unique(edges, axis=0)
    misattr = _misattributed(edges, true_right, true_left)
    return _finish(p, edges, labels, true_right, true_left, misattr, "power",
                   right_pos=right_pos, left_pos=left_pos)


MODELS = {
    "sequential": gen_sequential,
    "circle": gen_circle,
    "power": gen_power_circle,
}


def generate(model: str, params: GenParams):
    try:
        fn = MODELS[model]
    except KeyError:
        raise InvalidParams(f"unknown model {model!r}") from None
    return fn(params)


def empirical_fractions(graph, truth):
    """Realized (wild fraction, mislabel fraction among non-wild nodes)."""
    wild = truth.wild_mask
    tame = ~wild
    w = wild.mean() if wild.size else 0.0
    m = truth.mislabel_mask(graph)[tame].mean() if tame.any() else 0.0
    return float(w), float(m)


def cross_border_fraction(kernel, circumference, grid=4000):
    """Expected fraction of kernel-biased edges whose endpoints sit in
    different unit arcs, for nodes uniform on the circle and one neighbor
    drawn proportional to the kernel (numerical quadrature)."""
    half = circumference / 2.0
    u = (np.arange(grid) + 0.5) / grid * half
    w = kernel(u)
    if circumference <= 1:
        return 0.0
    # offset |u| <= 1 crosses a border with probability |u|; beyond, always
    cross = np.minimum(u, 1.0)
    return float(np.sum(w * cross) / np.sum(w))


def describe(params: GenParams) -> str:
    return " ".join(f"{k}={v}" for k, v in params.to_config().items())


__all__ = [
    "Exponential", "Step", "Threshold", "parse_kernel", "GenParams", "PRESETS",
    "InvalidParams", "gen_sequential", "gen_circle", "gen_power_circle", "generate",
    "sample_pareto_degree", "preferential_colors", "empirical_fractions",
    "cross_border_fraction", "arc_distance", "MODELS",
]
