"""Shared domain types: seeded RNG streams, box bounds, simplex and Gaussian sampling.

Vectors are plain float64 numpy arrays throughout: a preference vector lives on
the probability simplex, a decision vector in a problem's box, an objective
vector in R^m.  Validators raise instead of silently repairing values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute tolerance on sum(preference) == 1.
PREF_SUM_TOL = 1e-9

# Floor applied to preference components before Tchebycheff aggregation so
# that no objective becomes invisible to the max.
PREF_FLOOR = 1e-6


class DimensionError(ValueError):
    """Vector dimensions disagree or are out of the valid range."""


class OutOfBoundsError(ValueError):
    """A decision vector violates its box bounds."""


class RngStream:
    """Deterministic random stream: same seed + same call sequence -> same values.

    Thin wrapper over a PCG64 generator.  All randomness in the package flows
    through these streams.  Parallel work must not share a stream; derive
    independent children with ``child(key)`` instead, which is reproducible
    from (seed, key) alone.
    """

    def __init__(self, seed: int, _seq: np.random.SeedSequence | None = None):
        self.seed = int(seed)
        self._seq = _seq if _seq is not None else np.random.SeedSequence(self.seed)
        self.gen = np.random.Generator(np.random.PCG64(self._seq))

    def child(self, key: int) -> "RngStream":
        """Independent stream derived from (seed, key)."""
        seq = np.random.SeedSequence(entropy=(self.seed, int(key)))
        return RngStream(self.seed, _seq=seq)

    def __repr__(self):
        return f"RngStream(seed={self.seed})"


@dataclass(frozen=True)
class BoxBounds:
    """Axis-aligned feasible box; lower[i] < upper[i] everywhere."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionError(f"bound shapes disagree: {lo.shape} vs {hi.shape}")
        if not np.all(lo < hi):
            raise ValueError("lower bound must be strictly below upper bound componentwise")

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape == self.lower.shape and bool(
            np.all(x >= self.lower) and np.all(x <= self.upper)
        )

    def clip(self, x: np.ndarray) -> np.ndarray:
        """Componentwise projection onto the box (works on (n,) or (N, n))."""
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def random_point(self, rng: RngStream) -> np.ndarray:
        return self.lower + rng.gen.uniform(size=self.n) * self.width


def as_preference(w, m: int | None = None) -> np.ndarray:
    """Validate and return a preference vector (nonnegative, sums to 1)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] < 2:
        raise DimensionError(f"preference must be a vector of length >= 2, got shape {w.shape}")
    if m is not None and w.shape[0] != m:
        raise DimensionError(f"preference has length {w.shape[0]}, expected {m}")
    if np.any(w < 0):
        raise ValueError(f"preference has negative component: {w}")
    if abs(float(w.sum()) - 1.0) > PREF_SUM_TOL:
        raise ValueError(f"preference components sum to {w.sum()!r}, not 1")
    return w


def check_objectives(f: np.ndarray) -> np.ndarray:
    """Reject non-finite objective vectors (accepts (m,) or (N, m))."""
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("objective vector contains NaN or infinity")
    return f


def sample_preferences(m: int, count: int, rng: RngStream, min_weight: float = 0.0) -> np.ndarray:
    """Draw ``count`` preferences uniformly from the (m-1)-simplex, as a (count, m) array.

    Uses the exponential-spacings construction, which is exactly uniform
    (flat Dirichlet).  ``min_weight`` > 0 restricts draws to the sub-simplex
    where every component is at least that value, for callers that only care
    about a preference subset.

    Row i equals the i-th draw of a sequence of single-draw calls on the same
    stream, so prefixes of larger batches match smaller ones.
    """
    if m < 2:
        raise DimensionError(f"need at least 2 objectives, got m={m}")
    if count < 1:
        raise DimensionError(f"count must be >= 1, got {count}")
    if min_weight < 0 or m * min_weight >= 1.0:
        raise ValueError(f"min_weight={min_weight} must satisfy 0 <= m*min_weight < 1")
    e = rng.gen.standard_exponential((count, m))
    w = e / e.sum(axis=1, keepdims=True)
    if min_weight > 0.0:
        w = min_weight + (1.0 - m * min_weight) * w
    return w


def sample_preference(m: int, rng: RngStream, min_weight: float = 0.0) -> np.ndarray:
    """Single uniform draw from the (m-1)-simplex."""
    return sample_preferences(m, 1, rng, min_weight=min_weight)[0]


def sample_gaussian(n: int, count: int, rng: RngStream) -> np.ndarray:
    """(count, n) array of i.i.d. standard normal entries."""
    if n < 1 or count < 1:
        raise DimensionError(f"need n >= 1 and count >= 1, got n={n}, count={count}")
    return rng.gen.standard_normal((count, n))
