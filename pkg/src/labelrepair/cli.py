"""``labelrepair`` command line: generate instances, run repairers, report."""
from __future__ import annotations

import argparse
import ast
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import ALGORITHMS, make_repairer
from .bpgio import ParseError, load, save
from .evaluation import aggregate, judge, to_text, to_tsv, to_tsv_with_spread
from .generators import MODELS, PRESETS, GenParams, InvalidParams, generate
from .metrics import difficulty, format_rows

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# generator option name -> GenParams field
_GEN_FIELDS = {
    "num_colors": "num_colors", "left": "left_count", "right": "right_count",
    "omega": "omega", "lambda": "lam", "alpha": "alpha", "kernel": "kernel",
    "chi": "chi", "left_seed_degree": "left_seed_degree",
    "mean_right_degree": "mean_right_degree", "fraction_mode": "fraction_mode",
    "power_draws": "power_draws",
}


def read_config(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment line."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def parse_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low == "none":
        return None
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_overrides(items) -> dict:
    """``algo.key=value`` strings to ``{algo: {key: value}}``."""
    out: dict = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        algo, dot, param = key.partition(".")
        if not sep or not dot or not param:
            raise UsageError(f"--set expects algo.key=value, got {item!r}")
        if algo not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {algo!r} in --set")
        out.setdefault(algo, {})[param.replace("-", "_")] = parse_value(value)
    return out


def parse_algos(text: str) -> list:
    names = list(ALGORITHMS) if text.strip() == "all" else [a.strip() for a in text.split(",") if a.strip()]
    if not names:
        raise UsageError("at least one algorithm is required")
    for n in names:
        if n not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {n!r}; choose from {', '.join(ALGORITHMS)} or 'all'")
    return names


def _apply_config(args, cfg: dict, parser):
    """Fill options the user left at their defaults from the config file."""
    sets = []
    for key, value in cfg.items():
        if "." in key:
            sets.append(f"{key}={value}")
            continue
        if key == "set":
            sets.append(value)
            continue
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) == parser.get_default(key):
            action = next((a for a in parser._actions if a.dest == key), None)
            conv = action.type if action is not None and action.type else (lambda s: s)
            if action is not None and action.nargs in ("+", "*"):
                setattr(args, key, [conv(v) for v in value.split()])
            else:
                setattr(args, key, conv(value))
    if sets and hasattr(args, "set"):
        args.set = sets + list(args.set or [])


def _gen_params(args, seed) -> GenParams:
    kw = {}
    for opt, fld in _GEN_FIELDS.items():
        v = getattr(args, opt, None)
        if v is not None:
            kw[fld] = v
    return GenParams.preset(args.preset, seed=seed, **kw)


def _add_gen_options(p, model_required):
    p.add_argument("--model", choices=sorted(MODELS), required=model_required)
    p.add_argument("--preset", choices=sorted(PRESETS), default="small")
    p.add_argument("--num-colors", dest="num_colors", type=int)
    p.add_argument("--left", type=int, help="left node count")
    p.add_argument("--right", type=int, help="right node count")
    p.add_argument("--omega", type=float, help="wild fraction")
    p.add_argument("--lambda", dest="lambda", type=float, help="mislabel fraction")
    p.add_argument("--alpha", type=float, help="misattribution rate (sequential model)")
    p.add_argument("--kernel", help="exp:RATE, threshold:RADIUS or step:RADIUS,IN,OUT")
    p.add_argument("--chi", type=float)
    p.add_argument("--left-seed-degree", dest="left_seed_degree", type=int)
    p.add_argument("--mean-right-degree", dest="mean_right_degree", type=float)
    p.add_argument("--fraction-mode", dest="fraction_mode", choices=["exact", "bernoulli"])
    p.add_argument("--power-draws", dest="power_draws", choices=["merged", "distinct"])
    p.add_argument("--seed", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelrepair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random instances as .bpg files")
    _add_gen_options(g, model_required=True)
    g.add_argument("--count", type=int, default=1, help="instances, with consecutive seeds")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--config", help="flat key=value file")

    r = sub.add_parser("run", help="run repairers and report confusion tables")
    r.add_argument("--in", dest="inputs", nargs="+", help=".bpg input files")
    _add_gen_options(r, model_required=False)
    r.add_argument("--algos", default="all", help="comma list or 'all'")
    r.add_argument("--set", action="append", default=[], metavar="ALGO.KEY=VALUE")
    r.add_argument("--repeat", type=int, default=1, help="seeds per generated instance")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out", help="directory for report files")
    r.add_argument("--format", choices=["text", "tsv"], default="text")
    r.add_argument("--config", help="flat key=value file")

    m = sub.add_parser("metrics", help="difficulty metrics of .bpg files")
    m.add_argument("paths", nargs="+")
    return parser


def cmd_generate(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    os.makedirs(args.out, exist_ok=True)
    manifest = []
    for i in range(args.count):
        seed = args.seed + i
        params = _gen_params(args, seed)
        graph, truth = generate(args.model, params)
        name = f"{args.model}_{args.preset}_s{seed}.bpg"
        meta = dict(params.to_config(), model=args.model)
        save(os.path.join(args.out, name), graph, truth, meta)
        manifest.append(name + "\t" + " ".join(f"{k}={meta[k]}" for k in sorted(meta)))
        print(os.path.join(args.out, name))
    with open(os.path.join(args.out, "manifest"), "a", encoding="utf-8") as fh:
        fh.write("\n".join(manifest) + "\n")
    return EXIT_OK


def _instances(args):
    """Yield ``(name, graph, truth)`` for inputs or generated seeds."""
    if args.inputs:
        for path in args.inputs:
            graph, truth, _ = load(path)
            yield os.path.basename(path), graph, truth
        return
    if not args.model:
        raise UsageError("run needs --in files or --model")
    for i in range(max(args.repeat, 1)):
        seed = args.seed + i
        graph, truth = generate(args.model, _gen_params(args, seed))
        yield f"{args.model}_{args.preset}_s{seed}", graph, truth


def _run_one(algo, params, graph, truth):
    est = make_repairer(algo, **params)
    est.fit(graph)
    rep = judge(est.verdicts_, graph, truth, algo, est.fit_time_) if truth is not None else None
    return est, rep


def cmd_run(args) -> int:
    algos = parse_algos(args.algos)
    overrides = parse_overrides(args.set)
    for a, kw in overrides.items():
        try:
            make_repairer(a, **kw)._validate_params()
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad parameter for {a}: {exc}") from None
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    instances = list(_instances(args))
    jobs = [(inst, a) for inst in instances for a in algos]
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(pool.map(
            lambda job: _run_one(job[1], overrides.get(job[1], {}), job[0][1], job[0][2]),
            jobs))

    out_chunks = []
    per_algo = {a: [] for a in algos}
    for idx, (name, graph, truth) in enumerate(instances):
        rows = results[idx * len(algos):(idx + 1) * len(algos)]
        out_chunks.append(f"== {name}\n")
        out_chunks.append(format_rows([(name, difficulty(graph))]) + "\n")
        if truth is None:
            for a, (est, _) in zip(algos, rows):
                kinds = est.verdict_kinds()
                out_chunks.append(f"{a}\tkeep={int((kinds == 0).sum())}\t"
                                  f"relabel={int((kinds == 1).sum())}\twild={int((kinds == 2).sum())}\n")
            continue
        reps = [rep for _, rep in rows]
        for a, rep in zip(algos, reps):
            per_algo[a].append(rep)
        out_chunks.append(to_tsv(reps) if args.format == "tsv" else to_text(reps))
    if len(instances) > 1 and all(per_algo[a] for a in algos):
        pairs = [aggregate(per_algo[a]) for a in algos]
        out_chunks.append(f"== mean and standard deviation over {len(instances)} instances\n")
        out_chunks.append(to_tsv_with_spread(pairs))
    text = "".join(out_chunks)
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(os.path.join(args.out, "report.tsv"), "w", encoding="utf-8") as fh:
            all_reps = [rep for a in algos for rep in per_algo[a]]
            fh.write(to_tsv(all_reps, precise=True))
    return EXIT_OK


def cmd_metrics(args) -> int:
    rows = []
    for path in args.paths:
        graph, _, _ = load(path)
        rows.append((os.path.basename(path), difficulty(graph)))
    print(format_rows(rows))
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "metrics": cmd_metrics}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        if getattr(args, "config", None):
            _apply_config(args, read_config(args.config), parser._subparsers._group_actions[0].choices[args.command])
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"labelrepair: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, InvalidParams, ValueError) as exc:
        print(f"labelrepair: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
