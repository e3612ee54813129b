"""Quality metrics: dominance, nondominated filtering, hypervolume, IGD+.

The reporting protocol normalizes objectives into the unit cube using
approximate ideal/nadir points and measures hypervolume against the reference
vector (1.1, ..., 1.1).  Hypervolume is exact for 2 and 3 objectives
(sort-and-sweep / dimension-sweep slicing); higher dimensions fall back to a
Monte-Carlo estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, RngStream
from .problems import Problem

MC_SAMPLES = 1_000_000


@dataclass(frozen=True)
class MetricContext:
    """Normalization anchors plus the hypervolume reference vector."""

    z_ideal: np.ndarray
    z_nadir: np.ndarray
    hv_reference: np.ndarray | None = None

    def __post_init__(self):
        zi = np.asarray(self.z_ideal, dtype=float)
        zn = np.asarray(self.z_nadir, dtype=float)
        object.__setattr__(self, "z_ideal", zi)
        object.__setattr__(self, "z_nadir", zn)
        if not np.all(zi < zn):
            raise ValueError("ideal must be strictly below nadir componentwise")
        ref = self.hv_reference
        ref = np.full(zi.shape, 1.1) if ref is None else np.asarray(ref, dtype=float)
        object.__setattr__(self, "hv_reference", ref)

    @property
    def m(self) -> int:
        return self.z_ideal.shape[0]

    @classmethod
    def unit(cls, m: int) -> "MetricContext":
        return cls(np.zeros(m), np.ones(m))

    @classmethod
    def from_problem(cls, problem: Problem) -> "MetricContext":
        ideal, nadir = problem.metric_hints()
        return cls(ideal, nadir)


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """a is nowhere worse than b and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shapes disagree: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def strictly_dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """a is strictly better than b in every objective."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"shapes disagree: {a.shape} vs {b.shape}")
    return bool(np.all(a < b))


def nondominated_filter(points: np.ndarray) -> np.ndarray:
    """Indices (ascending) of points not dominated by any other point.

    Archive insertion: each point is screened against the surviving archive,
    and archive members it dominates are evicted.  Duplicates survive
    (domination needs one strict inequality).
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return np.empty(0, dtype=int)
    keep: list[int] = []
    arch = np.empty((0, points.shape[1]))
    for j, p in enumerate(points):
        le = (arch <= p).all(axis=1) & (arch < p).any(axis=1)
        if le.any():
            continue
        ge = (arch >= p).all(axis=1) & (arch > p).any(axis=1)
        if ge.any():
            alive = ~ge
            keep = [k for k, a in zip(keep, alive) if a]
            arch = arch[alive]
        keep.append(j)
        arch = np.vstack([arch, p[None, :]])
    return np.array(sorted(keep), dtype=int)


def normalize(f: np.ndarray, ctx: MetricContext) -> np.ndarray:
    """(f - ideal) / (nadir - ideal), componentwise; accepts (m,) or (N, m)."""
    return (np.asarray(f, dtype=float) - ctx.z_ideal) / (ctx.z_nadir - ctx.z_ideal)


def _hv2d(points: np.ndarray, ref: np.ndarray) -> float:
    # points: normalized, strictly below ref, nondominated, unsorted.
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    hv = 0.0
    for i in range(len(pts)):
        right = ref[0] if i + 1 == len(pts) else pts[i + 1, 0]
        hv += (right - pts[i, 0]) * (ref[1] - pts[i, 1])
    return hv


def _hv3d(points: np.ndarray, ref: np.ndarray) -> float:
    # Dimension sweep: integrate the 2D hypervolume of the (f1, f2) projection
    # over slabs between consecutive f3 levels.
    order = np.argsort(points[:, 2])
    pts = points[order]
    levels = pts[:, 2]
    hv = 0.0
    for i in range(len(pts)):
        top = ref[2] if i + 1 == len(pts) else levels[i + 1]
        slab = top - levels[i]
        if slab <= 0.0:
            continue
        proj = pts[: i + 1, :2]
        proj = proj[nondominated_filter(proj)]
        hv += _hv2d(proj, ref[:2]) * slab
    return hv


def _prepare(points: np.ndarray, ctx: MetricContext) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.size == 0:
        return np.empty((0, ctx.m))
    if points.shape[1] != ctx.m:
        raise DimensionError(f"points have {points.shape[1]} objectives, context has {ctx.m}")
    pts = normalize(points, ctx)
    # Points not strictly below the reference in every coordinate contribute nothing.
    pts = pts[(pts < ctx.hv_reference).all(axis=1)]
    if pts.shape[0] == 0:
        return pts
    return pts[nondominated_filter(pts)]


def hypervolume(points: np.ndarray, ctx: MetricContext) -> float:
    """Measure of objective space dominated by the points, up to the reference.

    Points are normalized through ctx first.  Exact for m in {2, 3};
    Monte-Carlo with MC_SAMPLES draws otherwise.
    """
    pts = _prepare(points, ctx)
    if pts.shape[0] == 0:
        return 0.0
    if ctx.m == 2:
        return _hv2d(pts, ctx.hv_reference)
    if ctx.m == 3:
        return _hv3d(pts, ctx.hv_reference)
    hv, _ = hypervolume_mc(points, ctx, MC_SAMPLES, RngStream(0))
    return hv


def hypervolume_mc(
    points: np.ndarray,
    ctx: MetricContext,
    n_samples: int,
    rng: RngStream,
) -> tuple[float, float]:
    """Monte-Carlo hypervolume estimate and its standard error.

    Samples uniformly in the box spanned by the componentwise minimum of the
    (normalized) points and the reference vector, and counts dominated draws.
    """
    pts = _prepare(points, ctx)
    if pts.shape[0] == 0:
        return 0.0, 0.0
    lo = pts.min(axis=0)
    ref = ctx.hv_reference
    vol = float(np.prod(ref - lo))
    hits = 0
    done = 0
    chunk = max(1, min(n_samples, 4_000_000 // max(pts.shape[0], 1)))
    while done < n_samples:
        c = min(chunk, n_samples - done)
        draws = lo + rng.gen.uniform(size=(c, ctx.m)) * (ref - lo)
        hits += int((pts[None, :, :] <= draws[:, None, :]).all(axis=2).any(axis=1).sum())
        done += c
    frac = hits / n_samples
    se = vol * np.sqrt(max(frac * (1.0 - frac), 0.0) / n_samples)
    return vol * frac, float(se)


def hv_gap(points: np.ndarray, ctx: MetricContext, reference_front: np.ndarray) -> float:
    """Hypervolume of the reference front minus hypervolume of the points."""
    if reference_front is None or np.asarray(reference_front).size == 0:
        raise ValueError("reference front is required for the hypervolume gap")
    return hypervolume(reference_front, ctx) - hypervolume(points, ctx)


def igd_plus(points: np.ndarray, reference_front: np.ndarray) -> float:
    """Mean dominance-aware distance from reference points to the nearest solution.

    For reference point z and solution a the distance is
    sqrt(sum_j max(a_j - z_j, 0)^2): only the directions in which a fails to
    dominate z count.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.atleast_2d(np.asarray(reference_front, dtype=float))
    if points.size == 0 or ref.size == 0:
        raise ValueError("igd_plus needs nonempty points and reference front")
    if points.shape[1] != ref.shape[1]:
        raise DimensionError(f"objective counts disagree: {points.shape[1]} vs {ref.shape[1]}")
    total = 0.0
    chunk = max(1, 2_000_000 // max(points.shape[0], 1))
    for start in range(0, ref.shape[0], chunk):
        block = ref[start : start + chunk]
        d = np.maximum(points[None, :, :] - block[:, None, :], 0.0)
        total += float(np.sqrt((d * d).sum(axis=2)).min(axis=1).sum())
    return total / ref.shape[0]
