"""Benchmark problem registry.

Two families:

* ``syn`` -- a bi-objective synthetic problem whose Pareto set is the sine
  curve x_i = sin(10*(x_1 - 0.5)), with analytic ground truth.
* ``re21/re23/re24/re25/re33/re37`` -- real-world engineering design problems
  (four bar truss, pressure vessel, hatch cover, coil compression spring,
  disc brake, rocket injector) ported from the published test-suite
  implementation.  Constraint violations are folded into the last objective,
  as in the suite.  Reference fronts and ideal/nadir hints load from the
  plain-text files shipped under ``pslearn/data``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .core import BoxBounds, DimensionError, OutOfBoundsError, RngStream, check_objectives


@dataclass(frozen=True)
class GroundTruth:
    """What is known about a problem's optimal set.

    ps_relation maps base-variable values x_1 (any shape) to the dependent
    coordinate value shared by all of x_2..x_n; None when no analytic Pareto
    set is known.  pf_samples is a dense (N, m) nondominated sample of the
    reference front; None when no reference data exists (never fabricated).
    """

    ps_relation: Callable[[np.ndarray], np.ndarray] | None = None
    pf_samples: np.ndarray | None = None


@dataclass(frozen=True)
class Problem:
    """A box-bounded multiobjective minimization problem.

    Evaluation is pure: same x, same objectives, bit for bit.  Inputs outside
    the box raise OutOfBoundsError; evaluation never clamps silently.
    """

    name: str
    n: int
    m: int
    bounds: BoxBounds
    ideal_hint: np.ndarray | None
    nadir_hint: np.ndarray | None
    _eval_batch: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _ground_truth: Callable[["Problem"], GroundTruth] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise DimensionError(f"need n >= 2 and m >= 2, got n={self.n}, m={self.m}")
        if self.ideal_hint is not None and self.nadir_hint is not None:
            if not np.all(np.asarray(self.ideal_hint) < np.asarray(self.nadir_hint)):
                raise ValueError("ideal hint must be strictly below nadir hint componentwise")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"{self.name}: expected shape ({self.n},), got {x.shape}")
        if not self.bounds.contains(x):
            raise OutOfBoundsError(f"{self.name}: point outside bounds: {x}")
        return check_objectives(self._eval_batch(x[None, :])[0])

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation of an (N, n) array; equals a loop of evaluate()."""
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return np.empty((0, self.m))
        if xs.ndim != 2 or xs.shape[1] != self.n:
            raise DimensionError(f"{self.name}: expected shape (N, {self.n}), got {xs.shape}")
        ok = (xs >= self.bounds.lower).all(axis=1) & (xs <= self.bounds.upper).all(axis=1)
        if not ok.all():
            i = int(np.flatnonzero(~ok)[0])
            raise OutOfBoundsError(f"{self.name}: point {i} outside bounds: {xs[i]}")
        return check_objectives(self._eval_batch(xs))

    def ground_truth(self) -> GroundTruth:
        if self._ground_truth is None:
            return GroundTruth()
        return self._ground_truth(self)

    def metric_hints(self, n_samples: int = 100_000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Ideal/nadir for metric normalization; estimated from random sampling when unknown."""
        if self.ideal_hint is not None and self.nadir_hint is not None:
            return self.ideal_hint.copy(), self.nadir_hint.copy()
        rng = RngStream(seed)
        xs = self.bounds.lower + rng.gen.uniform(size=(n_samples, self.n)) * self.bounds.width
        fs = self.evaluate_batch(xs)
        return fs.min(axis=0), fs.max(axis=0)

    def objective_scale(self) -> np.ndarray:
        """Per-objective range (nadir - ideal hints); ones when hints are unknown."""
        if self.ideal_hint is not None and self.nadir_hint is not None:
            return self.nadir_hint - self.ideal_hint
        return np.ones(self.m)


# ---------------------------------------------------------------------------
# Synthetic sine-curve problem


def _syn_relation(x1):
    return np.sin(10.0 * (np.asarray(x1, dtype=float) - 0.5))


def _syn_eval(xs: np.ndarray) -> np.ndarray:
    x1 = xs[:, 0]
    g = np.mean((xs[:, 1:] - _syn_relation(x1)[:, None]) ** 2, axis=1)
    f1 = x1
    f2 = (1.0 + g) * (1.0 - np.sqrt(x1 / (1.0 + g)))
    return np.stack([f1, f2], axis=1)


def _syn_ground_truth(problem: Problem) -> GroundTruth:
    t = np.linspace(0.0, 1.0, 1001)
    pf = np.stack([t, 1.0 - np.sqrt(t)], axis=1)
    return GroundTruth(ps_relation=_syn_relation, pf_samples=pf)


def make_synthetic(n: int = 3) -> Problem:
    if n < 2:
        raise DimensionError(f"synthetic problem needs n >= 2, got {n}")
    lower = np.full(n, -1.0)
    upper = np.full(n, 1.0)
    lower[0], upper[0] = 0.0, 1.0
    return Problem(
        name="syn",
        n=n,
        m=2,
        bounds=BoxBounds(lower, upper),
        ideal_hint=np.array([0.0, 0.0]),
        nadir_hint=np.array([1.0, 1.0]),
        _eval_batch=_syn_eval,
        _ground_truth=_syn_ground_truth,
    )


# ---------------------------------------------------------------------------
# RE engineering-design adapters.  Formulas are transcribed from the suite's
# reference implementation; constraint violations sum into the last objective.


def _violation(*gs):
    g = np.stack(gs)
    return np.where(g < 0, -g, 0.0).sum(axis=0)


def _re21_eval(xs):
    x1, x2, x3, x4 = xs.T
    force, E, L = 10.0, 2.0e5, 200.0
    f1 = L * ((2.0 * x1) + np.sqrt(2.0) * x2 + np.sqrt(x3) + x4)
    f2 = ((force * L) / E) * (
        (2.0 / x1) + (2.0 * np.sqrt(2.0) / x2) - (2.0 * np.sqrt(2.0) / x3) + (2.0 / x4)
    )
    return np.stack([f1, f2], axis=1)


def _re23_eval(xs):
    x1 = 0.0625 * np.round(xs[:, 0])
    x2 = 0.0625 * np.round(xs[:, 1])
    x3, x4 = xs[:, 2], xs[:, 3]
    f1 = (
        0.6224 * x1 * x3 * x4
        + 1.7781 * x2 * x3 * x3
        + 3.1661 * x1 * x1 * x4
        + 19.84 * x1 * x1 * x3
    )
    g1 = x1 - 0.0193 * x3
    g2 = x2 - 0.00954 * x3
    g3 = np.pi * x3 * x3 * x4 + (4.0 / 3.0) * np.pi * x3 ** 3 - 1296000.0
    return np.stack([f1, _violation(g1, g2, g3)], axis=1)


def _re24_eval(xs):
    x1, x2 = xs.T
    f1 = x1 + 120.0 * x2
    E, sigma_b_max, tau_max, delta_max = 700000.0, 700.0, 450.0, 1.5
    sigma_k = E * x1 * x1 / 100.0
    sigma_b = 4500.0 / (x1 * x2)
    tau = 1800.0 / x2
    delta = 56.2e4 / (E * x1 * x2 * x2)
    g1 = 1.0 - sigma_b / sigma_b_max
    g2 = 1.0 - tau / tau_max
    g3 = 1.0 - delta / delta_max
    g4 = 1.0 - sigma_b / sigma_k
    return np.stack([f1, _violation(g1, g2, g3, g4)], axis=1)


_RE25_WIRE_DIAMETERS = np.array([
    0.009, 0.0095, 0.0104, 0.0118, 0.0128, 0.0132, 0.014, 0.015, 0.0162,
    0.0173, 0.018, 0.02, 0.023, 0.025, 0.028, 0.032, 0.035, 0.041, 0.047,
    0.054, 0.063, 0.072, 0.08, 0.092, 0.105, 0.12, 0.135, 0.148, 0.162,
    0.177, 0.192, 0.207, 0.225, 0.244, 0.263, 0.283, 0.307, 0.331, 0.362,
    0.394, 0.4375, 0.5,
])


def _re25_eval(xs):
    x1 = np.round(xs[:, 0])
    x2 = xs[:, 1]
    # x3 snaps to the nearest standard wire diameter.
    idx = np.abs(_RE25_WIRE_DIAMETERS[None, :] - xs[:, 2][:, None]).argmin(axis=1)
    x3 = _RE25_WIRE_DIAMETERS[idx]
    f1 = np.pi * np.pi * x2 * x3 * x3 * (x1 + 2.0) / 4.0
    cf = ((4.0 * (x2 / x3) - 1.0) / (4.0 * (x2 / x3) - 4.0)) + 0.615 * x3 / x2
    fmax, stress_lim, G = 1000.0, 189000.0, 11.5e6
    spring_k = G * x3 ** 4 / (8.0 * x1 * x2 ** 3)
    lmax = 14.0
    lf = fmax / spring_k + 1.05 * (x1 + 2.0) * x3
    fp = 300.0
    sigma_p = fp / spring_k
    g1 = -(8.0 * cf * fmax * x2) / (np.pi * x3 ** 3) + stress_lim
    g2 = -lf + lmax
    g3 = -3.0 + x2 / x3
    g4 = -sigma_p + 6.0
    g5 = -sigma_p - (fmax - fp) / spring_k - 1.05 * (x1 + 2.0) * x3 + lf
    g6 = 1.25 - (fmax - fp) / spring_k
    return np.stack([f1, _violation(g1, g2, g3, g4, g5, g6)], axis=1)


def _re33_eval(xs):
    x1, x2, x3, x4 = xs.T
    f1 = 4.9e-5 * (x2 * x2 - x1 * x1) * (x4 - 1.0)
    f2 = (9.82e6 * (x2 * x2 - x1 * x1)) / (x3 * x4 * (x2 ** 3 - x1 ** 3))
    g1 = (x2 - x1) - 20.0
    g2 = 0.4 - x3 / (3.14 * (x2 * x2 - x1 * x1))
    g3 = 1.0 - (2.22e-3 * x3 * (x2 ** 3 - x1 ** 3)) / (x2 * x2 - x1 * x1) ** 2
    g4 = (2.66e-2 * x3 * x4 * (x2 ** 3 - x1 ** 3)) / (x2 * x2 - x1 * x1) - 900.0
    return np.stack([f1, f2, _violation(g1, g2, g3, g4)], axis=1)


def _re37_eval(xs):
    xa, xh, xo, xt = xs.T
    f1 = (
        0.692 + 0.477 * xa - 0.687 * xh - 0.080 * xo - 0.0650 * xt
        - 0.167 * xa * xa - 0.0129 * xh * xa + 0.0796 * xh * xh
        - 0.0634 * xo * xa - 0.0257 * xo * xh + 0.0877 * xo * xo
        - 0.0521 * xt * xa + 0.00156 * xt * xh + 0.00198 * xt * xo
        + 0.0184 * xt * xt
    )
    f2 = (
        0.153 - 0.322 * xa + 0.396 * xh + 0.424 * xo + 0.0226 * xt
        + 0.175 * xa * xa + 0.0185 * xh * xa - 0.0701 * xh * xh
        - 0.251 * xo * xa + 0.179 * xo * xh + 0.0150 * xo * xo
        + 0.0134 * xt * xa + 0.0296 * xt * xh + 0.0752 * xt * xo
        + 0.0192 * xt * xt
    )
    f3 = (
        0.370 - 0.205 * xa + 0.0307 * xh + 0.108 * xo + 1.019 * xt
        - 0.135 * xa * xa + 0.0141 * xh * xa + 0.0998 * xh * xh
        + 0.208 * xo * xa - 0.0301 * xo * xh - 0.226 * xo * xo
        + 0.353 * xt * xa - 0.0497 * xt * xo - 0.423 * xt * xt
        + 0.202 * xh * xa * xa - 0.281 * xo * xa * xa - 0.342 * xh * xh * xa
        - 0.245 * xh * xh * xo + 0.281 * xo * xo * xh - 0.184 * xt * xt * xa
        - 0.281 * xh * xa * xo
    )
    return np.stack([f1, f2, f3], axis=1)


def _load_data_file(fname: str) -> np.ndarray | None:
    ref = resources.files("pslearn.data").joinpath(fname)
    if not ref.is_file():
        return None
    rows = np.loadtxt(ref.read_text().splitlines(), dtype=float, ndmin=2)
    return rows


def _re_ground_truth(problem: Problem) -> GroundTruth:
    return GroundTruth(ps_relation=None, pf_samples=_load_data_file(f"ref_front_{problem.name}.txt"))


def _make_re(name, m, lower, upper, eval_batch) -> Problem:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    hints = _load_data_file(f"bounds_{name}.txt")
    ideal = hints[0] if hints is not None else None
    nadir = hints[1] if hints is not None else None
    return Problem(
        name=name,
        n=lower.shape[0],
        m=m,
        bounds=BoxBounds(lower, upper),
        ideal_hint=ideal,
        nadir_hint=nadir,
        _eval_batch=eval_batch,
        _ground_truth=_re_ground_truth,
    )


_SQRT2 = np.sqrt(2.0)

_RE_DEFS = {
    "re21": (2, [1.0, _SQRT2, _SQRT2, 1.0], [3.0, 3.0, 3.0, 3.0], _re21_eval),
    "re23": (2, [1.0, 1.0, 10.0, 10.0], [100.0, 100.0, 200.0, 240.0], _re23_eval),
    "re24": (2, [0.5, 0.5], [4.0, 50.0], _re24_eval),
    "re25": (2, [1.0, 0.6, 0.09], [70.0, 3.0, 0.5], _re25_eval),
    "re33": (3, [55.0, 75.0, 1000.0, 11.0], [80.0, 110.0, 3000.0, 20.0], _re33_eval),
    "re37": (3, [0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0], _re37_eval),
}

PROBLEM_NAMES = ("syn",) + tuple(_RE_DEFS)


def get_problem(name: str, n: int | None = None) -> Problem:
    """Look up a registered problem; ``n`` applies only to the synthetic one."""
    key = name.lower()
    if key == "syn":
        return make_synthetic(n if n is not None else 3)
    if key in _RE_DEFS:
        if n is not None:
            raise ValueError(f"{key} has a fixed decision dimension")
        m, lower, upper, fn = _RE_DEFS[key]
        return _make_re(key, m, lower, upper, fn)
    raise KeyError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}")
