"""Decomposition-based evolutionary baseline: MOEA/D with Tchebycheff aggregation.

A finite population of subproblems with lattice-spread weight vectors, each
solved collaboratively: children are produced inside a subproblem's weight
neighborhood by simulated binary crossover plus polynomial mutation, and
replace neighbors whose Tchebycheff value they improve.  Uses the same
utopia-offset scalarization as the set-model trainer so both methods optimize
identical subproblems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import RngStream
from .problems import Problem
from .scalarize import UtopiaState, tchebycheff_pairwise, update_ideal

NEIGHBORHOOD_SIZE = 20
SBX_ETA = 15.0
MUTATION_ETA = 20.0


@dataclass
class Population:
    """Subproblem population: one individual and one weight per subproblem."""

    xs: np.ndarray                 # (pop, n) decision vectors
    fs: np.ndarray                 # (pop, m) their objectives
    weights: np.ndarray            # (pop, m) lattice preference vectors
    neighborhoods: np.ndarray      # (pop, Tn) index lists, each containing its own index
    utopia: UtopiaState
    eval_count: int = 0

    @property
    def size(self) -> int:
        return self.xs.shape[0]


def _compositions(m: int, h: int) -> list[list[int]]:
    if m == 1:
        return [[h]]
    return [[first] + rest for first in range(h + 1) for rest in _compositions(m - 1, h - first)]


def _lattice(m: int, h: int) -> np.ndarray:
    """All compositions of h into m parts, lexicographic, scaled to the simplex."""
    return np.array(_compositions(m, h), dtype=float) / h


def init_weights(m: int, pop_size: int) -> np.ndarray:
    """Simplex-lattice weights, count matching pop_size when a lattice allows it.

    When no lattice parameter h yields exactly pop_size points, the nearest
    achievable size is used with a warning.
    """
    if pop_size < m:
        raise ValueError(f"pop_size must be >= m, got {pop_size} < {m}")
    h = 1
    while comb(h + m - 1, m - 1) < pop_size:
        h += 1
    count = comb(h + m - 1, m - 1)
    if count != pop_size:
        below = comb(h - 1 + m - 1, m - 1) if h > 1 else 0
        if below >= m and pop_size - below <= count - pop_size:
            h, count = h - 1, below
        warnings.warn(
            f"no simplex lattice has exactly {pop_size} points for m={m}; using {count}",
            stacklevel=2,
        )
    return _lattice(m, h)


def init_population(
    problem: Problem,
    pop_size: int,
    rng: RngStream,
    epsilon: float = 0.1,
    tn: int = NEIGHBORHOOD_SIZE,
    z_init: np.ndarray | None = None,
    scale_objectives: bool = True,
) -> Population:
    """Random initial population; evaluation cost counts toward the budget."""
    weights = init_weights(problem.m, pop_size)
    size = weights.shape[0]
    tn = min(tn, size)
    dists = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    neighborhoods = np.argsort(dists, axis=1, kind="stable")[:, :tn]
    xs = problem.bounds.lower + rng.gen.uniform(size=(size, problem.n)) * problem.bounds.width
    fs = problem.evaluate_batch(xs)
    z0 = np.full(problem.m, np.inf) if z_init is None else np.asarray(z_init, dtype=float)
    scale = problem.objective_scale() if scale_objectives else None
    utopia = update_ideal(UtopiaState(z0, epsilon, scale), fs)
    return Population(xs, fs, weights, neighborhoods, utopia, eval_count=size)


def sbx_crossover(a: np.ndarray, b: np.ndarray, bounds, rng: RngStream,
                  eta: float = SBX_ETA) -> np.ndarray:
    """Simulated binary crossover; returns one child, clipped into the box."""
    child = a.copy()
    for i in range(a.shape[0]):
        if rng.gen.uniform() > 0.5:
            continue
        u = rng.gen.uniform()
        if u <= 0.5:
            beta = (2.0 * u) ** (1.0 / (eta + 1.0))
        else:
            beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))
        child[i] = 0.5 * ((1.0 + beta) * a[i] + (1.0 - beta) * b[i])
    return bounds.clip(child)


def polynomial_mutation(x: np.ndarray, bounds, rng: RngStream,
                        eta: float = MUTATION_ETA, prob: float | None = None) -> np.ndarray:
    """Bounded polynomial mutation with per-coordinate probability 1/n by default."""
    n = x.shape[0]
    prob = 1.0 / n if prob is None else prob
    lo, hi = bounds.lower, bounds.upper
    y = x.copy()
    for i in range(n):
        if rng.gen.uniform() > prob:
            continue
        u = rng.gen.uniform()
        d1 = (y[i] - lo[i]) / (hi[i] - lo[i])
        d2 = (hi[i] - y[i]) / (hi[i] - lo[i])
        if u < 0.5:
            dq = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** (1.0 / (eta + 1.0)) - 1.0
        else:
            dq = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** (
                1.0 / (eta + 1.0)
            )
        y[i] += dq * (hi[i] - lo[i])
    return bounds.clip(y)


def evolve(problem: Problem, pop: Population, budget: int, rng: RngStream) -> Population:
    """Run the generational loop until ``budget`` further evaluations are consumed.

    For each subproblem in turn: mate two neighborhood members, cross, mutate,
    evaluate, fold the child into the ideal point, then replace every
    neighbor whose Tchebycheff value the child improves.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    spent = 0
    while spent < budget:
        for i in range(pop.size):
            if spent >= budget:
                break
            nb = pop.neighborhoods[i]
            pick = rng.gen.choice(nb.shape[0], size=2, replace=False)
            child = sbx_crossover(pop.xs[nb[pick[0]]], pop.xs[nb[pick[1]]], problem.bounds, rng)
            child = polynomial_mutation(child, problem.bounds, rng)
            fc = problem.evaluate(child)
            spent += 1
            pop.eval_count += 1
            pop.utopia = update_ideal(pop.utopia, fc)
            w_nb = pop.weights[nb]
            incumbent = tchebycheff_pairwise(pop.fs[nb], w_nb, pop.utopia)
            challenger = tchebycheff_pairwise(np.broadcast_to(fc, w_nb.shape), w_nb, pop.utopia)
            improved = nb[challenger < incumbent]
            pop.xs[improved] = child
            pop.fs[improved] = fc
    return pop
