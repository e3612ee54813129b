"""Command-line entry point: train, sample, compare, metrics, export-ui.

Output files land in --out when given, otherwise under $PSLEARN_OUT_DIR
(default: current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import artifact as art
from .core import RngStream
from .metrics import MetricContext
from .model import make_model, sample_set
from .moead import evolve, init_population
from .problems import PROBLEM_NAMES, get_problem
from .train import EsConfig, TrainConfig, default_sigma, train

OUT_DIR_ENV = "PSLEARN_OUT_DIR"

# Population sizes used by the decomposition baseline, by objective count.
MOEAD_POP_SIZE = {2: 100, 3: 105, 4: 120, 6: 182, 9: 210}

REPORT_NOTE = (
    "HV against reference (1.1, ...) and IGD+ are computed in objective space "
    "normalized by the approximate ideal/nadir points"
)


def _out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def _out_path(args, default_name: str) -> str:
    if getattr(args, "out", None):
        return args.out
    return os.path.join(_out_dir(), default_name)


def _add_problem_flags(p):
    p.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    p.add_argument("--dim", type=int, default=None,
                   help="decision dimension (synthetic problem only)")


def _add_train_flags(p):
    p.add_argument("--variant", choices=("plain", "shared", "relation", "chain"), default="plain")
    p.add_argument("--shared-idx", default=None,
                   help="comma-separated 1-based variable positions shared by all solutions, e.g. 3 or 1,4")
    p.add_argument("--relation", choices=("sine", "poly"), default="sine")
    p.add_argument("--vertices", type=int, default=4, help="chain vertex count")
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--n-pref", type=int, default=5)
    p.add_argument("--k-es", type=int, default=5)
    p.add_argument("--sigma", type=float, default=None,
                   help="ES smoothing radius (default: 5%% of narrowest box width)")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None,
                   help="training evaluation budget; overrides --iters via n_pref*(k_es+1) per iteration")
    p.add_argument("--adam", action="store_true", help="adaptive-moment update instead of plain SGD")
    p.add_argument("--adam-beta1", type=float, default=0.9)
    p.add_argument("--antithetic", action="store_true", help="mirrored ES perturbations")
    p.add_argument("--decay-tail", type=float, default=0.0,
                   help="cosine-decay the step size over the last fraction of iterations")
    p.add_argument("--average-tail", type=float, default=0.0,
                   help="average parameters over the last fraction of iterations")
    p.add_argument("--no-z-hints", action="store_true",
                   help="track the ideal point purely online instead of seeding from hints")
    p.add_argument("--feature-scale", type=float, default=6.0,
                   help="first-layer random-feature init scale")
    p.add_argument("--min-weight", type=float, default=0.0,
                   help="restrict preference sampling to components >= this value")
    p.add_argument("--samples", type=int, default=1000,
                   help="dense sample count stored in the artifact")
    p.add_argument("--samples-main", type=int, default=100,
                   help="comparison sample count (a prefix of the dense set)")


def _parse_shared_idx(spec_str, n):
    if spec_str is None:
        raise SystemExit("--shared-idx is required for the shared variant")
    try:
        idx = sorted({int(s) - 1 for s in spec_str.split(",")})
    except ValueError:
        raise SystemExit(f"malformed --shared-idx: {spec_str!r}")
    if any(i < 0 or i >= n for i in idx):
        raise SystemExit(f"--shared-idx out of range 1..{n}: {spec_str!r}")
    return idx


def _train_once(problem, args, seed):
    """Train one set model and package the artifact (without writing it)."""
    sigma = args.sigma if args.sigma is not None else default_sigma(problem)
    iters = args.iters
    if args.budget is not None:
        iters = args.budget // (args.n_pref * (args.k_es + 1))
    cfg = TrainConfig(
        n_pref=args.n_pref,
        iters=iters,
        eta=args.eta,
        es=EsConfig(k=args.k_es, sigma=sigma, antithetic=args.antithetic),
        seed=seed,
        epsilon=args.epsilon,
        min_weight=args.min_weight,
        adam=args.adam,
        adam_beta1=args.adam_beta1,
        cosine_decay=False,
        decay_tail=args.decay_tail,
        average_tail=args.average_tail,
        z_init_from_hints=not args.no_z_hints,
    )
    kw = {}
    if args.variant == "shared":
        kw["shared_idx"] = _parse_shared_idx(args.shared_idx, problem.n)
    elif args.variant == "relation":
        kw["relation"] = args.relation
    elif args.variant == "chain":
        kw["vertices"] = args.vertices
    model = make_model(args.variant, problem, RngStream(seed).child(0), h=args.hidden,
                       feature_scale=args.feature_scale, **kw)

    t0 = time.perf_counter()
    state = train(problem, model, cfg)
    optimize_ms = 1000.0 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    lams, xs, fs = sample_set(model, problem, args.samples, RngStream(seed).child(1))
    sample_ms = 1000.0 * (time.perf_counter() - t0)

    counts = sorted({min(args.samples_main, args.samples), args.samples})
    ctx = MetricContext.from_problem(problem)
    metrics = {str(c): art.sample_metrics(problem, fs[:c], ctx) for c in counts}
    config = {
        "problem": problem.name, "dim": problem.n, "variant": args.variant,
        "hidden": args.hidden, "train": cfg.to_dict(),
    }
    if args.variant == "shared":
        config["shared_idx"] = kw["shared_idx"]
    if args.variant == "relation":
        config["relation"] = args.relation
    if args.variant == "chain":
        config["vertices"] = args.vertices
    return build_and_time(problem, model, state, config, lams, xs, fs, counts, metrics,
                          optimize_ms, sample_ms)


def build_and_time(problem, model, state, config, lams, xs, fs, counts, metrics,
                   optimize_ms, sample_ms):
    return art.build_artifact(
        problem=problem,
        method="psl",
        config=config,
        samples=art.make_samples_block(lams, xs, fs, counts),
        metrics=metrics,
        eval_count={"train": state.eval_count, "sample": len(fs)},
        timings={"optimize_ms": optimize_ms, "sample_ms": sample_ms},
        model=model,
        log=state.log,
    )


def _moead_once(problem, seed, budget, epsilon=0.1):
    pop_size = MOEAD_POP_SIZE.get(problem.m, 100)
    rng = RngStream(seed)
    t0 = time.perf_counter()
    pop = init_population(problem, pop_size, rng, epsilon=epsilon)
    pop = evolve(problem, pop, max(budget - pop.eval_count, 0), rng)
    optimize_ms = 1000.0 * (time.perf_counter() - t0)
    ctx = MetricContext.from_problem(problem)
    metrics = {str(pop.size): art.sample_metrics(problem, pop.fs, ctx)}
    return art.build_artifact(
        problem=problem,
        method="moead-tch",
        config={"problem": problem.name, "pop_size": pop.size, "budget": budget,
                "seed": seed, "epsilon": epsilon},
        samples=art.make_samples_block(pop.weights, pop.xs, pop.fs, [pop.size]),
        metrics=metrics,
        eval_count={"train": pop.eval_count, "sample": 0},
        timings={"optimize_ms": optimize_ms, "sample_ms": 0.0},
        population={"xs": pop.xs.tolist(), "fs": pop.fs.tolist(),
                    "weights": pop.weights.tolist()},
    )


def cmd_train(args) -> int:
    problem = get_problem(args.problem, args.dim)
    artifact = _train_once(problem, args, args.seed)
    path = _out_path(args, f"run_{args.problem}_{args.variant}_s{args.seed}.json")
    art.save_artifact(artifact, path)
    if args.train_log:
        with open(args.train_log, "w") as fh:
            for rec in artifact["log"]:
                fh.write(json.dumps(rec) + "\n")
    main_count = str(min(args.samples_main, args.samples))
    mm = artifact["metrics"][main_count]
    print(f"trained {args.problem}/{args.variant} seed={args.seed} "
          f"train_evals={artifact['eval_count']['train']} "
          f"hv={mm['hv']:.6f} hv_gap={_fmt(mm['hv_gap'])} -> {path}")
    return 0


def _fmt(v):
    return "n/a" if v is None else f"{v:.6f}"


def cmd_sample(args) -> int:
    artifact = art.load_artifact(args.artifact)
    problem, (lams, xs, fs) = art.resample_artifact(artifact, args.count, args.seed)
    payload = {
        "problem": artifact["problem"],
        "seed": args.seed,
        **art.make_samples_block(lams, xs, fs, [args.count]),
    }
    path = _out_path(args, f"samples_{problem.name}_s{args.seed}.json")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh)
    print(f"sampled {args.count} solutions from {args.artifact} -> {path}")
    return 0


def _report_row(problem, method, seed, metrics, eval_count, wall_ms):
    return {
        "problem": problem.name, "method": method, "seed": seed,
        "hv": metrics["hv"], "hv_gap": metrics["hv_gap"],
        "igd_plus": metrics["igd_plus"] if problem.m == 2 else None,
        "eval_count": eval_count, "wall_time_ms": wall_ms,
    }


def write_report(rows, path, extra_header=None) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        header = {"note": REPORT_NOTE}
        if extra_header:
            header.update(extra_header)
        fh.write(json.dumps(header) + "\n")
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def cmd_compare(args) -> int:
    problem = get_problem(args.problem, args.dim)
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = []
    for seed in seeds:
        psl_art = _train_once(problem, args, seed)
        for count in psl_art["samples"]["counts"]:
            method = "psl" if count == min(psl_art["samples"]["counts"]) else f"psl-{count}"
            rows.append(_report_row(
                problem, method, seed, psl_art["metrics"][str(count)],
                psl_art["eval_count"]["train"] + count,
                psl_art["timings"]["optimize_ms"],
            ))
        budget = args.budget if args.budget is not None else (
            args.n_pref * (args.k_es + 1) * args.iters
        )
        mo_art = _moead_once(problem, seed, budget, epsilon=args.epsilon)
        rows.append(_report_row(
            problem, "moead-tch", seed, mo_art["metrics"][str(len(mo_art["samples"]["xs"]))],
            mo_art["eval_count"]["train"], mo_art["timings"]["optimize_ms"],
        ))
    medians = {}
    for method in sorted({r["method"] for r in rows}):
        gaps = [r["hv_gap"] for r in rows if r["method"] == method and r["hv_gap"] is not None]
        medians[method] = float(np.median(gaps)) if gaps else None
    path = _out_path(args, f"compare_{args.problem}.jsonl")
    write_report(rows, path, extra_header={"median_hv_gap": medians})
    for row in rows:
        print(f"{row['problem']:6s} {row['method']:10s} seed={row['seed']:<4d} "
              f"hv={row['hv']:.6f} hv_gap={_fmt(row['hv_gap'])} "
              f"evals={row['eval_count']}")
    print("median hv_gap: " + ", ".join(f"{k}={_fmt(v)}" for k, v in medians.items()))
    print(f"report -> {path}")
    return 0


def cmd_metrics(args) -> int:
    artifact = art.load_artifact(args.artifact)
    problem = art.problem_from_meta(artifact["problem"])
    fs = np.array(artifact["samples"]["fs"])
    rows = []
    for count in artifact["samples"]["counts"]:
        metrics = art.sample_metrics(problem, fs[:count])
        rows.append(_report_row(
            problem, f"{artifact['method']}@{count}",
            artifact["config"].get("seed", artifact["config"].get("train", {}).get("seed")),
            metrics, artifact["eval_count"]["train"], artifact["timings"]["optimize_ms"],
        ))
        print(f"{problem.name} n={count}: hv={metrics['hv']:.6f} "
              f"hv_gap={_fmt(metrics['hv_gap'])} igd_plus={_fmt(metrics['igd_plus'])}")
    if args.out:
        write_report(rows, args.out)
        print(f"report -> {args.out}")
    return 0


def cmd_export_ui(args) -> int:
    artifact = art.load_artifact(args.artifact)
    bundle = art.export_ui_bundle(artifact, args.grid)
    path = _out_path(args, f"bundle_{bundle['problem']['name']}.json")
    art.save_bundle(bundle, path)
    print(f"exported UI bundle with {len(bundle['grid']['lambdas'])} grid points -> {path} "
          f"(reeval_max_abs_err={bundle['consistency']['reeval_max_abs_err']:g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pslearn",
        description="Learn the whole Pareto set of a multiobjective problem as one model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a set model and write a run artifact")
    _add_problem_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", default=None)
    p.add_argument("--train-log", default=None,
                   help="also write the per-iteration training log to this JSONL file")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("sample", help="draw solutions from a trained artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("compare", help="set model vs MOEA/D under equal budgets")
    _add_problem_flags(p)
    _add_train_flags(p)
    p.add_argument("--seeds", default="0", help="comma-separated seed list")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("metrics", help="recompute the metrics report for an artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("export-ui", help="export the interactive explorer bundle")
    p.add_argument("--artifact", required=True)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_export_ui)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
