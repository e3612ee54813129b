"""Generate reference fronts and ideal/nadir hint files for the RE problems.

Approach: dense Tchebycheff scalarization solves (L-BFGS-B multistart over a
fine weight grid) plus a large random-sampling pool, merged and nondominated-
filtered, then thinned to about 1000 well-spread points.  Results land in
src/pslearn/data/ as ref_front_<name>.txt / bounds_<name>.txt.

Run once offline: python3 scripts/make_ref_fronts.py
"""

import os
import sys

import numpy as np
from scipy.optimize import minimize

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pslearn.core import RngStream  # noqa: E402
from pslearn.metrics import nondominated_filter  # noqa: E402
from pslearn.problems import get_problem  # noqa: E402

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "pslearn", "data")

# Published approximate ideal/nadir points for the ported problems.
HINTS = {
    "re21": ([1.23920758e03, 2.98607537e-03], [2.97123988e03, 4.85512338e-02]),
    "re23": ([15.9018007813, 0.0], [713710.875, 1288669.78054]),
    "re24": ([60.65314083, 0.0], [5997.8316325, 43.67584229]),
    "re25": ([0.03759284, 0.0], [1.24795202e02, 1.00387350e07]),
    "re33": ([-0.721525, 1.13907203907, 0.0], [8.01164324, 8.83604223, 2343.29711914]),
    "re37": ([0.00889341391106, 0.00488, -0.431499999825],
             [0.98949120096, 0.956587924661, 0.987530948586]),
}


def weight_grid(m, count):
    if m == 2:
        w = np.linspace(0.0, 1.0, count)
        return np.stack([w, 1.0 - w], axis=1)
    pts = []
    h = int(np.ceil((np.sqrt(8.0 * count + 1) - 3) / 2))
    for i in range(h + 1):
        for j in range(h + 1 - i):
            pts.append([i, j, h - i - j])
    return np.array(pts, dtype=float) / h


def tch_solve(problem, lam, z, x0):
    lo, hi = problem.bounds.lower, problem.bounds.upper
    lamc = np.maximum(lam, 1e-6)
    lamc = lamc / lamc.sum()

    def fn(x):
        f = problem._eval_batch(np.clip(x, lo, hi)[None, :])[0]
        return float(np.max(lamc * (f - z + 0.05)))

    res = minimize(fn, x0, method="L-BFGS-B", bounds=list(zip(lo, hi)),
                   options={"maxiter": 200, "eps": 1e-7})
    return np.clip(res.x, lo, hi)


def build_front(name, n_weights=400 , n_starts=3, pool=200_000, seed=0):
    problem = get_problem(name)
    rng = RngStream(seed)
    lo, hi = problem.bounds.lower, problem.bounds.upper

    xs_pool = lo + rng.gen.uniform(size=(pool, problem.n)) * (hi - lo)
    fs_pool = problem.evaluate_batch(xs_pool)
    z = fs_pool.min(axis=0)

    sols = [xs_pool[i] for i in nondominated_filter(fs_pool)]
    weights = weight_grid(problem.m, n_weights)
    for lam in weights:
        for s in range(n_starts):
            if s == 0 and sols:
                x0 = sols[rng.gen.integers(len(sols))]
            else:
                x0 = lo + rng.gen.uniform(size=problem.n) * (hi - lo)
            x = tch_solve(problem, lam, z, x0)
            sols.append(x)
    xs = np.array(sols)
    fs = problem.evaluate_batch(xs)
    keep = nondominated_filter(fs)
    front = fs[keep]
    # keep only the metric-relevant region: points beyond the published nadir
    # normalize above the 1.1 hypervolume reference and contribute nothing
    ideal, nadir = np.array(HINTS[name][0]), np.array(HINTS[name][1])
    norm = (front - ideal) / (nadir - ideal)
    front = front[(norm < 1.1).all(axis=1)]
    order = np.lexsort(front.T[::-1])
    front = front[order]
    if front.shape[0] > 1500:
        idx = np.linspace(0, front.shape[0] - 1, 1500).astype(int)
        front = front[np.unique(idx)]
    return front


N_WEIGHTS = {"re21": 2000, "re23": 1500, "re24": 400, "re25": 1500, "re33": 400, "re37": 400}


def main():
    os.makedirs(DATA_DIR, exist_ok=True)
    for name, (ideal, nadir) in HINTS.items():
        with open(os.path.join(DATA_DIR, f"bounds_{name}.txt"), "w") as fh:
            fh.write(" ".join(repr(float(v)) for v in ideal) + "\n")
            fh.write(" ".join(repr(float(v)) for v in nadir) + "\n")
        front = build_front(name, n_weights=N_WEIGHTS[name])
        path = os.path.join(DATA_DIR, f"ref_front_{name}.txt")
        with open(path, "w") as fh:
            for row in front:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        print(f"{name}: {front.shape[0]} points -> {path}")
        print(f"   f min {front.min(axis=0)}")
        print(f"   f max {front.max(axis=0)}")


if __name__ == "__main__":
    main()
