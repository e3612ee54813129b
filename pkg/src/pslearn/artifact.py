"""Run persistence and the UI export bundle.

A run artifact is one JSON document holding everything needed to reproduce
and inspect a run: the config snapshot (seed included), the trained model or
final population, sampled (preference, solution, objectives) triples, the
metrics report, the per-iteration training log, and wall-clock timings.
Everything except the ``timings`` block is a pure function of the config, so
two runs with the same config produce byte-identical artifacts up to timings.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .core import RngStream
from .metrics import MetricContext, hv_gap, hypervolume, igd_plus, normalize
from .model import SetModel, model_from_dict, sample_set
from .moead import init_weights
from .problems import Problem, get_problem
from .scalarize import clip_preference

ARTIFACT_SCHEMA_VERSION = 1
BUNDLE_SCHEMA_VERSION = 1


def problem_from_meta(meta: dict) -> Problem:
    name = meta["name"]
    return get_problem(name, meta["n"] if name == "syn" else None)


def sample_metrics(problem: Problem, fs: np.ndarray, ctx: MetricContext | None = None) -> dict:
    """HV / hypervolume gap / IGD+ for one objective-vector set.

    Gap and IGD+ need a reference front and are null without one.  IGD+ is
    computed in the same normalized space as the hypervolume protocol.
    """
    ctx = ctx if ctx is not None else MetricContext.from_problem(problem)
    ref = problem.ground_truth().pf_samples
    out = {"hv": hypervolume(fs, ctx), "hv_gap": None, "igd_plus": None}
    if ref is not None:
        out["hv_gap"] = hv_gap(fs, ctx, ref)
        out["igd_plus"] = igd_plus(normalize(fs, ctx), normalize(ref, ctx))
    return out


def build_artifact(
    problem: Problem,
    method: str,
    config: dict,
    samples: dict,
    metrics: dict,
    eval_count: dict,
    timings: dict,
    model: SetModel | None = None,
    population: dict | None = None,
    log: list | None = None,
) -> dict:
    return {
        "schema_version": ARTIFACT_SCHEMA_VERSION,
        "problem": {"name": problem.name, "n": problem.n, "m": problem.m},
        "method": method,
        "config": config,
        "model": model.to_dict() if model is not None else None,
        "population": population,
        "samples": samples,
        "metrics": metrics,
        "eval_count": eval_count,
        "log": log or [],
        "timings": timings,
    }


def save_artifact(artifact: dict, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(artifact, fh)


def load_artifact(path) -> dict:
    with open(path) as fh:
        art = json.load(fh)
    if art.get("schema_version") != ARTIFACT_SCHEMA_VERSION:
        raise ValueError(f"unsupported artifact schema version: {art.get('schema_version')!r}")
    return art


def strip_timings(artifact: dict) -> dict:
    return {k: v for k, v in artifact.items() if k != "timings"}


def make_samples_block(lams, xs, fs, counts) -> dict:
    return {
        "counts": list(counts),
        "lambdas": np.asarray(lams).tolist(),
        "xs": np.asarray(xs).tolist(),
        "fs": np.asarray(fs).tolist(),
    }


def resample_artifact(artifact: dict, count: int, seed: int):
    """Draw a fresh solution set from an artifact's model."""
    if artifact.get("model") is None:
        raise ValueError("artifact has no set model to sample from")
    problem = problem_from_meta(artifact["problem"])
    model = model_from_dict(artifact["model"])
    return problem, sample_set(model, problem, count, RngStream(seed))


def _grid_preferences(m: int, grid: int) -> tuple[np.ndarray, int | None]:
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    if m == 2:
        lam1 = np.linspace(0.0, 1.0, grid)
        lams = np.stack([lam1, 1.0 - lam1], axis=1)
        return np.array([clip_preference(w) for w in lams]), None
    if m == 3:
        lams = init_weights(3, grid)
        # count = (h+1)(h+2)/2 for the m=3 lattice; invert for the UI interpolator.
        h = int(round((np.sqrt(8.0 * lams.shape[0] + 1.0) - 3.0) / 2.0))
        return np.array([clip_preference(w) for w in lams]), h
    raise ValueError(f"UI export supports m in {{2, 3}}, got m={m}")


def export_ui_bundle(artifact: dict, grid: int) -> dict:
    """Dense (preference, solution, objectives) mesh plus display metadata.

    The bundle is self-contained: the browser explorer never evaluates the
    problem, it only interpolates these triples.  The consistency stamp is the
    max abs error of re-evaluating the serialized solutions, computed after a
    JSON round-trip so it certifies exactly what the file contains.
    """
    if artifact.get("model") is None:
        raise ValueError("artifact has no set model; UI export needs one")
    problem = problem_from_meta(artifact["problem"])
    model = model_from_dict(artifact["model"])
    lams, lattice_h = _grid_preferences(problem.m, grid)
    xs = np.stack([model.forward(lam) for lam in lams])
    fs = problem.evaluate_batch(xs)

    variant_meta = {"variant": model.variant}
    mdl = artifact["model"]
    if model.variant == "shared":
        variant_meta["shared_idx"] = mdl["shared_idx"]
        variant_meta["shared_values"] = model.shared_values().tolist()
    elif model.variant == "relation":
        variant_meta.update(
            base_idx=mdl["base_idx"], relation=mdl["relation"],
            alpha=mdl["alpha"], beta=mdl["beta"],
        )
    elif model.variant == "chain":
        variant_meta["vertices"] = model.vertices().tolist()

    gt = problem.ground_truth()
    ideal, nadir = problem.metric_hints()
    bundle = {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "kind": "ui-bundle",
        "problem": {"name": problem.name, "n": problem.n, "m": problem.m},
        "bounds": {
            "lower": problem.bounds.lower.tolist(),
            "upper": problem.bounds.upper.tolist(),
        },
        "ideal": ideal.tolist(),
        "nadir": nadir.tolist(),
        "variant": variant_meta,
        "reference_front": gt.pf_samples.tolist() if gt.pf_samples is not None else None,
        "grid": {
            "lattice_h": lattice_h,
            "lambdas": lams.tolist(),
            "xs": xs.tolist(),
            "fs": fs.tolist(),
        },
    }
    # Round-trip through JSON, then re-evaluate what the file will contain.
    echo = json.loads(json.dumps(bundle))
    fs_echo = problem.evaluate_batch(np.array(echo["grid"]["xs"]))
    bundle["consistency"] = {
        "reeval_max_abs_err": float(np.max(np.abs(fs_echo - np.array(echo["grid"]["fs"]))))
    }
    return bundle


def save_bundle(bundle: dict, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(bundle, fh)
