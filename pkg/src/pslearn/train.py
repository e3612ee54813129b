"""Gaussian-smoothing gradient estimation and the set-model training loop.

The decision-space gradient of the scalarized subproblem is estimated from
objective values at K Gaussian perturbations around the model output, then
pulled back to model parameters through the exact network VJP.  Plain
stochastic gradient descent updates all trainable blocks jointly; an
adaptive-moment update and antithetic sampling are available behind flags but
off by default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DimensionError, RngStream, sample_gaussian, sample_preference
from .model import SetModel
from .problems import Problem
from .scalarize import UtopiaState, clip_preference, tchebycheff, tchebycheff_values, update_ideal


@dataclass(frozen=True)
class EsConfig:
    """Perturbation count, smoothing radius, and estimator flavor.

    sigma may be a scalar (isotropic in raw coordinates) or a per-coordinate
    vector; the default picks one radius per coordinate proportional to its
    box width, which is isotropic after normalizing coordinates to the unit
    cube.
    """

    k: int = 5
    sigma: float | tuple = 0.05
    use_tch_variant: bool = False  # single-objective form along the argmax objective
    antithetic: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        sig = np.asarray(self.sigma, dtype=float)
        if not np.all(sig > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "sigma", self.sigma if sig.ndim == 0 else tuple(sig.tolist()))

    @property
    def sigma_vec(self):
        return np.asarray(self.sigma, dtype=float)


def default_sigma(problem: Problem, rel: float = 0.05) -> tuple:
    """Default smoothing radius: ``rel`` of the box width, per coordinate."""
    return tuple((rel * problem.bounds.width).tolist())


@dataclass(frozen=True)
class TrainConfig:
    n_pref: int = 5           # preferences per iteration (MC batch)
    iters: int = 1000
    eta: float = 0.01         # step size
    es: EsConfig = field(default_factory=EsConfig)
    seed: int = 0
    epsilon: float = 0.1      # utopia offset
    min_weight: float = 0.0
    adam: bool = False
    adam_beta1: float = 0.9
    cosine_decay: bool = False
    decay_tail: float = 0.0   # cosine-decay eta over only the last fraction of iterations
    average_tail: float = 0.0  # Polyak-average parameters over the last fraction of iterations
    z_init_from_hints: bool = True  # seed the running ideal from the problem's ideal hint
    scale_objectives: bool = True   # divide aggregation terms by hint ranges

    def __post_init__(self):
        if self.n_pref < 1 or self.iters < 0 or not self.eta > 0:
            raise ValueError(f"need n_pref >= 1, iters >= 0, eta > 0; got {self}")
        for name in ("decay_tail", "average_tail"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["es"] = dict(self.es.__dict__)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["es"] = EsConfig(**d["es"])
        return cls(**d)


@dataclass
class TrainState:
    """Everything the loop carries: model, running ideal, bookkeeping, RNG."""

    model: SetModel
    utopia: UtopiaState
    iteration: int
    loss_history: list[float]
    eval_count: int
    rng: RngStream
    log: list[dict] = field(default_factory=list)


class TrainingDivergedError(RuntimeError):
    """Loss or gradient went non-finite; carries the state at failure."""

    def __init__(self, message: str, state: TrainState):
        super().__init__(message)
        self.state = state


def es_gradient(f, x: np.ndarray, sigma: float, k: int, rng: RngStream,
                antithetic: bool = False) -> np.ndarray:
    """Gaussian-smoothing gradient estimate of a scalar function at x.

    f maps a (P, n) batch of points to (P,) values and is called once on the
    center plus the K perturbed points.  With ``antithetic``, perturbations
    come in +/- pairs (odd K keeps one unpaired draw).
    """
    x = np.asarray(x, dtype=float)
    if antithetic:
        half = sample_gaussian(x.shape[0], (k + 1) // 2, rng)
        u = np.concatenate([half, -half[: k - half.shape[0]]], axis=0)
    else:
        u = sample_gaussian(x.shape[0], k, rng)
    vals = np.asarray(f(np.vstack([x[None, :], x + sigma * u])), dtype=float)
    return (vals[1:] - vals[0]) @ u / (sigma * k)


def estimate_grad_x(
    problem: Problem,
    x: np.ndarray,
    lam: np.ndarray,
    utopia: UtopiaState,
    es: EsConfig,
    rng: RngStream,
) -> tuple[np.ndarray, int, UtopiaState, float]:
    """Estimated decision-space gradient of the Tchebycheff subproblem at x.

    Perturbed points are clamped into the box before evaluation; the
    estimator keeps the unclamped directions.  Every evaluation folds into
    the running ideal point, and all scalarizations in one call share the
    post-fold snapshot.  Returns (grad, evals_used, utopia, center loss).
    """
    x = np.asarray(x, dtype=float)
    sigma = es.sigma_vec
    if es.antithetic:
        half = sample_gaussian(x.shape[0], (es.k + 1) // 2, rng)
        u = np.concatenate([half, -half[: es.k - half.shape[0]]], axis=0)
    else:
        u = sample_gaussian(x.shape[0], es.k, rng)
    pts = problem.bounds.clip(x + sigma * u)
    fs = problem.evaluate_batch(np.vstack([x[None, :], pts]))
    utopia = update_ideal(utopia, fs)
    if es.use_tch_variant:
        loss, j = tchebycheff(fs[0], lam, utopia, rng)
        lamc = clip_preference(lam)
        grad = lamc[j] * ((fs[1:, j] - fs[0, j]) @ u) / (sigma * es.k)
    else:
        vals = tchebycheff_values(fs, lam, utopia)
        loss = float(vals[0])
        grad = (vals[1:] - vals[0]) @ u / (sigma * es.k)
    return grad, es.k + 1, utopia, loss


def estimate_grad_params(
    model: SetModel,
    problem: Problem,
    lam: np.ndarray,
    utopia: UtopiaState,
    es: EsConfig,
    rng: RngStream,
) -> tuple[np.ndarray, int, UtopiaState, float]:
    """Parameter gradient for one preference: ES estimate composed with the model VJP."""
    x = model.forward(lam)
    grad_x, evals, utopia, loss = estimate_grad_x(problem, x, lam, utopia, es, rng)
    return model.backward(lam, grad_x), evals, utopia, loss


def train(problem: Problem, model: SetModel, cfg: TrainConfig) -> TrainState:
    """Run the full training loop; returns the final state.

    Per iteration: sample n_pref preferences, average their estimated
    parameter gradients, take one descent step on all trainable blocks.
    Deterministic given (cfg, initial model): loss_history is bit-exact
    across runs.
    """
    if model.m != problem.m or model.n != problem.n:
        raise DimensionError(
            f"model is ({model.m}->{model.n}), problem needs ({problem.m}->{problem.n})"
        )
    z0 = np.full(problem.m, np.inf)
    if cfg.z_init_from_hints and problem.ideal_hint is not None:
        z0 = np.asarray(problem.ideal_hint, dtype=float).copy()
    scale = problem.objective_scale() if cfg.scale_objectives else None
    state = TrainState(
        model=model,
        utopia=UtopiaState(z0, cfg.epsilon, scale),
        iteration=0,
        loss_history=[],
        eval_count=0,
        rng=RngStream(cfg.seed),
        log=[],
    )
    b1, b2 = cfg.adam_beta1, 0.999
    adam_m = np.zeros(model.n_params)
    adam_v = np.zeros(model.n_params)
    avg = np.zeros(model.n_params)
    n_avg = 0
    for t in range(1, cfg.iters + 1):
        gsum = np.zeros(model.n_params)
        lsum = 0.0
        for _ in range(cfg.n_pref):
            lam = sample_preference(problem.m, state.rng, min_weight=cfg.min_weight)
            grad, evals, state.utopia, loss = estimate_grad_params(
                model, problem, lam, state.utopia, cfg.es, state.rng
            )
            gsum += grad
            lsum += loss
            state.eval_count += evals
        gbar = gsum / cfg.n_pref
        mean_loss = lsum / cfg.n_pref
        if not (np.isfinite(mean_loss) and np.all(np.isfinite(gbar))):
            state.iteration = t
            raise TrainingDivergedError(f"non-finite loss or gradient at iteration {t}", state)
        frac = t / max(cfg.iters, 1)
        eta = cfg.eta
        if cfg.cosine_decay:
            eta *= 0.5 * (1.0 + math.cos(math.pi * (t - 1) / max(cfg.iters, 1)))
        elif cfg.decay_tail > 0.0 and frac > 1.0 - cfg.decay_tail:
            eta *= 0.5 * (1.0 + math.cos(math.pi * (frac - (1.0 - cfg.decay_tail)) / cfg.decay_tail))
        if cfg.adam:
            adam_m = b1 * adam_m + (1.0 - b1) * gbar
            adam_v = b2 * adam_v + (1.0 - b2) * gbar * gbar
            mhat = adam_m / (1.0 - b1 ** t)
            vhat = adam_v / (1.0 - b2 ** t)
            step = eta * mhat / (np.sqrt(vhat) + 1e-8)
        else:
            step = eta * gbar
        model.set_flat(model.get_flat() - step)
        if cfg.average_tail > 0.0 and frac > 1.0 - cfg.average_tail:
            avg += model.get_flat()
            n_avg += 1
        state.iteration = t
        state.loss_history.append(mean_loss)
        state.log.append({
            "iteration": t,
            "loss": mean_loss,
            "eval_count": state.eval_count,
            "z_star": state.utopia.z_star.tolist(),
        })
    if n_avg > 0:
        model.set_flat(avg / n_avg)
    return state


def write_training_log(state: TrainState, path) -> None:
    """One JSON record per line per iteration."""
    with open(path, "w") as fh:
        for rec in state.log:
            fh.write(json.dumps(rec) + "\n")
