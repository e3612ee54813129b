"""Aggregation of an objective vector and a preference into one scalar subproblem value."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import PREF_FLOOR, DimensionError, RngStream

# Relative tolerance under which aggregation terms count as tied.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class UtopiaState:
    """Running ideal-point estimate z* plus the offset that keeps the utopia unattainable.

    z_star must stay at or below every objective value observed so far;
    callers maintain that by folding evaluations through update_ideal.

    ``scale`` holds per-objective ranges (nadir minus ideal hints).  The
    aggregation divides by it so disparately scaled objectives compete on an
    even footing, and epsilon is measured in those scaled units.  Default is
    all ones, which is the plain unscaled form.
    """

    z_star: np.ndarray
    epsilon: float = 0.1
    scale: np.ndarray | None = None

    def __post_init__(self):
        z = np.asarray(self.z_star, dtype=float)
        object.__setattr__(self, "z_star", z)
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        s = np.ones_like(z) if self.scale is None else np.asarray(self.scale, dtype=float)
        if s.shape != z.shape or not np.all(s > 0):
            raise ValueError(f"scale must be positive with shape {z.shape}, got {self.scale}")
        object.__setattr__(self, "scale", s)

    @property
    def utopia(self) -> np.ndarray:
        return self.z_star - self.epsilon * self.scale


def clip_preference(lam: np.ndarray, floor: float = PREF_FLOOR) -> np.ndarray:
    """Lift degenerate components to >= floor and renormalize to the simplex."""
    w = np.maximum(np.asarray(lam, dtype=float), floor)
    return w / w.sum()


def weighted_sum(f: np.ndarray, lam: np.ndarray) -> float:
    f = np.asarray(f, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if f.shape != lam.shape:
        raise DimensionError(f"objective/preference shapes disagree: {f.shape} vs {lam.shape}")
    return float(lam @ f)


def tchebycheff(
    f: np.ndarray,
    lam: np.ndarray,
    u: UtopiaState,
    rng: RngStream | None = None,
) -> tuple[float, int]:
    """Weighted Tchebycheff value max_j lam_j * (f_j - utopia_j) and its argmax index.

    Preference components are clipped to PREF_FLOOR first.  Terms within
    TIE_RTOL of the max count as tied; ties break uniformly at random through
    ``rng`` when given, otherwise to the lowest index.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != u.z_star.shape:
        raise DimensionError(f"objective/utopia shapes disagree: {f.shape} vs {u.z_star.shape}")
    lamc = clip_preference(lam)
    if lamc.shape != f.shape:
        raise DimensionError(f"preference/objective shapes disagree: {lamc.shape} vs {f.shape}")
    terms = lamc * (f - u.utopia) / u.scale
    vmax = float(terms.max())
    tied = np.flatnonzero(terms >= vmax - TIE_RTOL * max(1.0, abs(vmax)))
    if len(tied) > 1 and rng is not None:
        j = int(rng.gen.choice(tied))
    else:
        j = int(tied[0])
    return vmax, j


def tchebycheff_values(fs: np.ndarray, lam: np.ndarray, u: UtopiaState) -> np.ndarray:
    """Tchebycheff values for a (N, m) batch of objective vectors (no argmax)."""
    fs = np.asarray(fs, dtype=float)
    lamc = clip_preference(lam)
    return (lamc * (fs - u.utopia) / u.scale).max(axis=1)


def tchebycheff_pairwise(fs: np.ndarray, lams: np.ndarray, u: UtopiaState) -> np.ndarray:
    """Rowwise Tchebycheff: value of fs[i] under preference lams[i], for all i."""
    fs = np.asarray(fs, dtype=float)
    w = np.maximum(np.asarray(lams, dtype=float), PREF_FLOOR)
    w = w / w.sum(axis=1, keepdims=True)
    return (w * (fs - u.utopia) / u.scale).max(axis=1)


def update_ideal(u: UtopiaState, f: np.ndarray) -> UtopiaState:
    """Fold one objective vector (m,) or a batch (N, m) into the running minimum."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[None, :]
    if f.shape[1] != u.z_star.shape[0]:
        raise DimensionError(f"objective dimension {f.shape[1]} != {u.z_star.shape[0]}")
    return replace(u, z_star=np.minimum(u.z_star, f.min(axis=0)))
