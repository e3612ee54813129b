"""Preference-conditioned set models: map a preference vector to one solution.

The base map is a two-layer perceptron with tanh hidden units whose outputs
are squashed onto the feasible box by a scaled logistic, so every forward
output is in-box by construction.  Three structure-constrained variants reuse
the same trunk:

* shared component -- a chosen coordinate subset takes one trainable value,
  identical across the whole solution set;
* variable relation -- dependent coordinates follow a learnable sine or
  polynomial expression of the first base coordinate;
* polygonal chain -- the network emits a scalar tracer that walks a chain of
  trainable vertices, so the whole set is a piecewise-linear curve.

``backward`` is the exact vector-Jacobian product of the forward map over all
trainable blocks jointly, returned as one flat gradient vector in the same
layout as ``get_flat``/``set_flat``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import BoxBounds, DimensionError, RngStream, sample_preferences
from .problems import Problem

MODEL_SCHEMA_VERSION = 1

VARIANTS = ("plain", "shared", "relation", "chain")
RELATION_KINDS = ("sine", "poly")

DEFAULT_HIDDEN = 128
DEFAULT_VERTICES = 4


def squash(z, lo, hi):
    """Scaled logistic onto (lo, hi); squash(0) is the box midpoint."""
    return lo + (hi - lo) * expit(z)


def squash_grad(z, lo, hi):
    s = expit(z)
    return (hi - lo) * s * (1.0 - s)


def chain_point(vertices: np.ndarray, t: float) -> np.ndarray:
    """Point on the polygonal chain at tracer position t in [1, K].

    Segment k covers t in [k, k+1]; t = k yields vertex k exactly
    (1-based vertex numbering, K vertices, K-1 segments).
    """
    K = vertices.shape[0]
    if K < 2:
        raise DimensionError(f"chain needs at least 2 vertices, got {K}")
    k = int(np.clip(np.floor(t), 1, K - 1))
    w = t - k
    return (1.0 - w) * vertices[k - 1] + w * vertices[k]


# First-layer weight/bias scale of the random-feature initialization.  The
# preference input always lives on the unit simplex, so an absolute scale is
# problem-independent.  At small scales the tanh features are near-linear in
# the preference and the net cannot cheaply express oscillatory
# preference-to-solution maps; wide features fix that without touching
# trainability of smooth maps.
FEATURE_SCALE = 6.0


@dataclass
class MlpParams:
    """Two-layer perceptron parameters: out = W2 @ tanh(W1 @ lam + b1) + b2."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @classmethod
    def init(cls, m: int, n_out: int, h: int, rng: RngStream,
             feature_scale: float = FEATURE_SCALE) -> "MlpParams":
        # Random-feature first layer (wide weights, spread biases); output
        # layer ~ N(0, 1/fan_in) with zero bias, so squash(out) starts near
        # the box midpoint.
        g = rng.gen
        return cls(
            W1=g.standard_normal((h, m)) * feature_scale,
            b1=g.standard_normal(h) * (0.5 * feature_scale),
            W2=g.standard_normal((n_out, h)) / np.sqrt(h),
            b2=np.zeros(n_out),
        )

    @property
    def n_params(self) -> int:
        return self.W1.size + self.b1.size + self.W2.size + self.b2.size

    def forward(self, lam: np.ndarray):
        z1 = self.W1 @ lam + self.b1
        a = np.tanh(z1)
        z2 = self.W2 @ a + self.b2
        return z2, (lam, z1, a)

    def vjp(self, cache, g_z2: np.ndarray) -> np.ndarray:
        """Gradient of g_z2 . out over [W1, b1, W2, b2], flattened."""
        lam, z1, a = cache
        g_W2 = np.outer(g_z2, a)
        g_a = self.W2.T @ g_z2
        g_z1 = g_a * (1.0 - a * a)  # tanh'
        g_W1 = np.outer(g_z1, lam)
        return np.concatenate([g_W1.ravel(), g_z1, g_W2.ravel(), g_z2])

    def get_flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.W2.ravel(), self.b2])

    def set_flat(self, v: np.ndarray) -> None:
        i = 0
        for arr in (self.W1, self.b1, self.W2, self.b2):
            arr[...] = v[i : i + arr.size].reshape(arr.shape)
            i += arr.size


class SetModel:
    """Base class; subclasses implement the variant-specific head."""

    variant: str

    def __init__(self, m: int, n: int, h: int, bounds: BoxBounds, mlp: MlpParams):
        self.m = m
        self.n = n
        self.h = h
        self.bounds = bounds
        self.mlp = mlp

    # -- forward / backward ------------------------------------------------

    def forward(self, lam: np.ndarray) -> np.ndarray:
        x = self._head(self.mlp.forward(np.asarray(lam, dtype=float))[0])
        # Guard against 1-ulp float dust from the squash arithmetic.
        return np.clip(x, self.bounds.lower, self.bounds.upper)

    def backward(self, lam: np.ndarray, grad_x: np.ndarray) -> np.ndarray:
        """Exact VJP of forward: returns d(grad_x . x)/d(params), flat."""
        grad_x = np.asarray(grad_x, dtype=float)
        if grad_x.shape != (self.n,):
            raise DimensionError(f"grad_x must have shape ({self.n},), got {grad_x.shape}")
        z2, cache = self.mlp.forward(np.asarray(lam, dtype=float))
        g_z2, g_extra = self._head_vjp(z2, grad_x)
        g_mlp = self.mlp.vjp(cache, g_z2)
        return np.concatenate([g_mlp, g_extra]) if g_extra.size else g_mlp

    def _head(self, z2: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _head_vjp(self, z2: np.ndarray, grad_x: np.ndarray):
        raise NotImplementedError

    # -- flat parameter access ----------------------------------------------

    def _extra_arrays(self) -> list[np.ndarray]:
        return []

    @property
    def n_params(self) -> int:
        return self.mlp.n_params + sum(a.size for a in self._extra_arrays())

    def get_flat(self) -> np.ndarray:
        parts = [self.mlp.get_flat()] + [a.ravel() for a in self._extra_arrays()]
        return np.concatenate(parts)

    def set_flat(self, v: np.ndarray) -> None:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_params,):
            raise DimensionError(f"expected {self.n_params} parameters, got {v.shape}")
        self.mlp.set_flat(v[: self.mlp.n_params])
        i = self.mlp.n_params
        for arr in self._extra_arrays():
            arr[...] = v[i : i + arr.size].reshape(arr.shape)
            i += arr.size

    # -- serialization -------------------------------------------------------

    def _variant_fields(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "variant": self.variant,
            "m": self.m,
            "n": self.n,
            "h": self.h,
            "bounds": {"lower": self.bounds.lower.tolist(), "upper": self.bounds.upper.tolist()},
            "params": {
                "w1": self.mlp.W1.tolist(),
                "b1": self.mlp.b1.tolist(),
                "w2": self.mlp.W2.tolist(),
                "b2": self.mlp.b2.tolist(),
            },
            **self._variant_fields(),
        }


class PlainModel(SetModel):
    """Unconstrained map: every coordinate comes straight from the network."""

    variant = "plain"

    def _head(self, z2):
        return squash(z2, self.bounds.lower, self.bounds.upper)

    def _head_vjp(self, z2, grad_x):
        return grad_x * squash_grad(z2, self.bounds.lower, self.bounds.upper), np.empty(0)


class SharedComponentModel(SetModel):
    """Coordinates in ``shared_idx`` take one trainable value for the whole set."""

    variant = "shared"

    def __init__(self, m, n, h, bounds, mlp, shared_idx, beta_raw):
        super().__init__(m, n, h, bounds, mlp)
        self.shared_idx = np.asarray(shared_idx, dtype=int)
        self.free_idx = np.setdiff1d(np.arange(n), self.shared_idx)
        if self.shared_idx.size == 0 or np.unique(self.shared_idx).size != self.shared_idx.size:
            raise ValueError(f"shared_idx must be nonempty and unique, got {shared_idx}")
        if self.shared_idx.min() < 0 or self.shared_idx.max() >= n:
            raise ValueError(f"shared_idx out of range for n={n}: {shared_idx}")
        if self.free_idx.size == 0:
            raise ValueError("at least one coordinate must remain free")
        self.beta_raw = np.asarray(beta_raw, dtype=float)

    def _head(self, z2):
        s, p = self.shared_idx, self.free_idx
        lo, hi = self.bounds.lower, self.bounds.upper
        x = np.empty(self.n)
        x[p] = squash(z2, lo[p], hi[p])
        x[s] = squash(self.beta_raw, lo[s], hi[s])
        return x

    def _head_vjp(self, z2, grad_x):
        s, p = self.shared_idx, self.free_idx
        lo, hi = self.bounds.lower, self.bounds.upper
        g_z2 = grad_x[p] * squash_grad(z2, lo[p], hi[p])
        g_beta = grad_x[s] * squash_grad(self.beta_raw, lo[s], hi[s])
        return g_z2, g_beta

    def _extra_arrays(self):
        return [self.beta_raw]

    def _variant_fields(self):
        return {
            "shared_idx": self.shared_idx.tolist(),
            "beta_raw": self.beta_raw.tolist(),
        }

    def shared_values(self) -> np.ndarray:
        """Current decision-space values of the shared coordinates."""
        s = self.shared_idx
        return squash(self.beta_raw, self.bounds.lower[s], self.bounds.upper[s])


class VariableRelationModel(SetModel):
    """Dependent coordinates follow a learnable expression of the first base coordinate.

    sine: x_s = sin(alpha * (x_b - beta));  poly: x_s = 1 - alpha * (x_b - beta)^2.
    The raw expression value is clipped onto the box, which keeps the literal
    form wherever it is feasible (the sine case with bounds containing [-1, 1]
    is exact everywhere).
    """

    variant = "relation"

    def __init__(self, m, n, h, bounds, mlp, base_idx, kind, alpha, beta):
        super().__init__(m, n, h, bounds, mlp)
        if kind not in RELATION_KINDS:
            raise ValueError(f"relation kind must be one of {RELATION_KINDS}, got {kind!r}")
        self.kind = kind
        self.base_idx = np.asarray(base_idx, dtype=int)
        self.dep_idx = np.setdiff1d(np.arange(n), self.base_idx)
        if self.base_idx.size == 0 or self.dep_idx.size == 0:
            raise ValueError("relation variant needs both base and dependent coordinates")
        self.alpha = np.asarray(alpha, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        if self.alpha.shape != (self.dep_idx.size,) or self.beta.shape != (self.dep_idx.size,):
            raise DimensionError("alpha/beta must have one entry per dependent coordinate")

    def _relation(self, xb):
        d = xb - self.beta
        if self.kind == "sine":
            return np.sin(self.alpha * d)
        return 1.0 - self.alpha * d * d

    def _head(self, z2):
        p, s = self.base_idx, self.dep_idx
        lo, hi = self.bounds.lower, self.bounds.upper
        x = np.empty(self.n)
        x[p] = squash(z2, lo[p], hi[p])
        x[s] = np.clip(self._relation(x[p[0]]), lo[s], hi[s])
        return x

    def _head_vjp(self, z2, grad_x):
        p, s = self.base_idx, self.dep_idx
        lo, hi = self.bounds.lower, self.bounds.upper
        xb = squash(z2[0], lo[p[0]], hi[p[0]])
        d = xb - self.beta
        r = self._relation(xb)
        gate = (r >= lo[s]) & (r <= hi[s])
        gs = grad_x[s] * gate
        if self.kind == "sine":
            c = np.cos(self.alpha * d)
            dr_dxb, dr_dalpha, dr_dbeta = self.alpha * c, d * c, -self.alpha * c
        else:
            dr_dxb, dr_dalpha, dr_dbeta = -2.0 * self.alpha * d, -d * d, 2.0 * self.alpha * d
        g_xp = grad_x[p].copy()
        g_xp[0] += float(gs @ dr_dxb)  # indirect path through the relation
        g_z2 = g_xp * squash_grad(z2, lo[p], hi[p])
        g_extra = np.concatenate([gs * dr_dalpha, gs * dr_dbeta])
        return g_z2, g_extra

    def _extra_arrays(self):
        return [self.alpha, self.beta]

    def _variant_fields(self):
        return {
            "base_idx": self.base_idx.tolist(),
            "relation": self.kind,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
        }


class PolygonalChainModel(SetModel):
    """The whole set lies on a chain of K trainable vertices, walked by a scalar tracer.

    The network output squashes onto the tracer domain [1, K].  Vertices live
    directly in decision space and are kept feasible by projection: every
    parameter write clips them into the box, so they can sit exactly on a box
    face (where chain optima often are) while keeping full gradients inside.
    Interpolated points stay in-box by convexity.
    """

    variant = "chain"

    def __init__(self, m, n, h, bounds, mlp, vertices_raw):
        super().__init__(m, n, h, bounds, mlp)
        self.vertices_raw = bounds.clip(np.asarray(vertices_raw, dtype=float))
        if self.vertices_raw.ndim != 2 or self.vertices_raw.shape[0] < 2 \
                or self.vertices_raw.shape[1] != n:
            raise DimensionError(f"vertices must be (K >= 2, {n}), got {self.vertices_raw.shape}")

    @property
    def K(self) -> int:
        return self.vertices_raw.shape[0]

    def vertices(self) -> np.ndarray:
        """Vertices in decision space."""
        return self.vertices_raw.copy()

    def tracer(self, lam: np.ndarray) -> float:
        z2, _ = self.mlp.forward(np.asarray(lam, dtype=float))
        return 1.0 + (self.K - 1) * float(expit(z2[0]))

    def set_flat(self, v: np.ndarray) -> None:
        super().set_flat(v)
        self.vertices_raw[...] = self.bounds.clip(self.vertices_raw)

    def _head(self, z2):
        t = 1.0 + (self.K - 1) * float(expit(z2[0]))
        return chain_point(self.vertices_raw, t)

    def _head_vjp(self, z2, grad_x):
        t = 1.0 + (self.K - 1) * float(expit(z2[0]))
        k = int(np.clip(np.floor(t), 1, self.K - 1))
        w = t - k
        g_vraw = np.zeros_like(self.vertices_raw)
        g_vraw[k - 1] = (1.0 - w) * grad_x
        g_vraw[k] = w * grad_x
        g_t = float(grad_x @ (self.vertices_raw[k] - self.vertices_raw[k - 1]))
        s = expit(z2[0])
        g_z2 = np.array([g_t * (self.K - 1) * s * (1.0 - s)])
        return g_z2, g_vraw.ravel()

    def _extra_arrays(self):
        return [self.vertices_raw]

    def _variant_fields(self):
        return {"k": self.K, "vertices_raw": self.vertices_raw.tolist()}


def make_model(
    variant: str,
    problem: Problem,
    rng: RngStream,
    h: int = DEFAULT_HIDDEN,
    shared_idx=None,
    relation: str = "sine",
    base_idx=(0,),
    vertices: int = DEFAULT_VERTICES,
    feature_scale: float = FEATURE_SCALE,
) -> SetModel:
    """Build an initialized model of the given variant for a problem."""
    m, n, bounds = problem.m, problem.n, problem.bounds
    if variant == "plain":
        return PlainModel(m, n, h, bounds, MlpParams.init(m, n, h, rng, feature_scale))
    if variant == "shared":
        if shared_idx is None:
            raise ValueError("shared variant needs shared_idx")
        shared_idx = np.asarray(shared_idx, dtype=int)
        mlp = MlpParams.init(m, n - shared_idx.size, h, rng, feature_scale)
        # beta_raw = 0 puts every shared coordinate at the box midpoint.
        return SharedComponentModel(m, n, h, bounds, mlp, shared_idx, np.zeros(shared_idx.size))
    if variant == "relation":
        base_idx = np.asarray(base_idx, dtype=int)
        n_dep = n - base_idx.size
        mlp = MlpParams.init(m, base_idx.size, h, rng, feature_scale)
        alpha = np.ones(n_dep)
        beta = np.full(n_dep, 0.5 * (bounds.lower[base_idx[0]] + bounds.upper[base_idx[0]]))
        return VariableRelationModel(m, n, h, bounds, mlp, base_idx, relation, alpha, beta)
    if variant == "chain":
        if vertices < 2:
            raise ValueError(f"chain needs at least 2 vertices, got {vertices}")
        mlp = MlpParams.init(m, 1, h, rng, feature_scale)
        # Vertices start evenly spaced on a random in-box segment.
        a = bounds.random_point(rng)
        b = bounds.random_point(rng)
        verts = a + np.linspace(0.0, 1.0, vertices)[:, None] * (b - a)
        return PolygonalChainModel(m, n, h, bounds, mlp, verts)
    raise ValueError(f"unknown variant {variant!r}; known: {VARIANTS}")


def model_from_dict(d: dict) -> SetModel:
    if d.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema version: {d.get('schema_version')!r}")
    bounds = BoxBounds(np.array(d["bounds"]["lower"]), np.array(d["bounds"]["upper"]))
    p = d["params"]
    mlp = MlpParams(
        W1=np.array(p["w1"]), b1=np.array(p["b1"]),
        W2=np.array(p["w2"]), b2=np.array(p["b2"]),
    )
    m, n, h = d["m"], d["n"], d["h"]
    variant = d["variant"]
    if variant == "plain":
        return PlainModel(m, n, h, bounds, mlp)
    if variant == "shared":
        return SharedComponentModel(
            m, n, h, bounds, mlp, np.array(d["shared_idx"], dtype=int), np.array(d["beta_raw"])
        )
    if variant == "relation":
        return VariableRelationModel(
            m, n, h, bounds, mlp, np.array(d["base_idx"], dtype=int), d["relation"],
            np.array(d["alpha"]), np.array(d["beta"]),
        )
    if variant == "chain":
        return PolygonalChainModel(m, n, h, bounds, mlp, np.array(d["vertices_raw"]))
    raise ValueError(f"unknown variant {variant!r}")


def save_model(model: SetModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path) -> SetModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def sample_set(
    model: SetModel,
    problem: Problem,
    count: int,
    rng: RngStream,
    min_weight: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``count`` preferences, map them through the model, evaluate.

    Returns (lambdas (count, m), xs (count, n), fs (count, m)).  Deterministic
    under the stream, and prefix-consistent: the first rows of a larger draw
    equal a smaller draw from the same seed.
    """
    if count < 1:
        raise DimensionError(f"count must be >= 1, got {count}")
    lams = sample_preferences(model.m, count, rng, min_weight=min_weight)
    xs = np.stack([model.forward(lam) for lam in lams])
    fs = problem.evaluate_batch(xs)
    return lams, xs, fs
