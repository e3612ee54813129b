/** Piecewise-linear interpolation over the bundle grid.
 *
 * m=2: linear over the first preference component (grid is sorted by it).
 * m=3: barycentric over the triangular lattice cells.
 * Exact at grid nodes; every returned value is a convex combination of grid
 * rows, so the explorer never invents objective values.
 */

import { UiBundle } from "./bundle.js";

export interface LookupResult {
  lambda: number[];
  x: number[];
  f: number[];
  /** contributing grid rows and their convex weights (provenance) */
  nodes: number[];
  weights: number[];
}

function combine(bundle: UiBundle, nodes: number[], weights: number[]): LookupResult {
  const { xs, fs, lambdas } = bundle.grid;
  const n = xs[0].length;
  const m = fs[0].length;
  const x = new Array(n).fill(0);
  const f = new Array(m).fill(0);
  const lam = new Array(m).fill(0);
  for (let t = 0; t < nodes.length; t++) {
    const w = weights[t];
    const idx = nodes[t];
    for (let i = 0; i < n; i++) x[i] += w * xs[idx][i];
    for (let j = 0; j < m; j++) {
      f[j] += w * fs[idx][j];
      lam[j] += w * lambdas[idx][j];
    }
  }
  return { lambda: lam, x, f, nodes, weights };
}

function lookup2d(bundle: UiBundle, lam1: number): LookupResult {
  const lams = bundle.grid.lambdas;
  const last = lams.length - 1;
  const v = Math.min(Math.max(lam1, lams[0][0]), lams[last][0]);
  let lo = 0;
  let hi = last;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (lams[mid][0] <= v) lo = mid;
    else hi = mid;
  }
  if (v === lams[lo][0]) return combine(bundle, [lo], [1.0]);
  if (v === lams[hi][0]) return combine(bundle, [hi], [1.0]);
  const w = (v - lams[lo][0]) / (lams[hi][0] - lams[lo][0]);
  return combine(bundle, [lo, hi], [1 - w, w]);
}

/** Flat grid index of lattice node (i, j) with i + j + k = h. */
export function latticeIndex(h: number, i: number, j: number): number {
  return i * (h + 1) - (i * (i - 1)) / 2 + j;
}

const SNAP = 1e-9;

function snap(v: number): number {
  const r = Math.round(v);
  return Math.abs(v - r) < SNAP ? r : v;
}

function lookup3d(bundle: UiBundle, lam: number[]): LookupResult {
  const h = bundle.grid.lattice_h as number;
  // project onto the simplex: clamp negatives, renormalize
  let [p, q, r] = lam.map((v) => Math.max(v, 0));
  const s = p + q + r || 1;
  p /= s;
  q /= s;
  r = 1 - p - q;
  const a = snap(p * h);
  const b = snap(q * h);
  const c = snap(h - a - b);
  let i0 = Math.min(Math.floor(a), h);
  let j0 = Math.min(Math.floor(b), h - i0);
  let k0 = Math.min(Math.floor(c), h - i0 - j0);
  const f1 = a - i0;
  const f2 = b - j0;
  const f3 = c - k0;
  const rem = Math.round(h - i0 - j0 - k0);
  if (rem === 0) {
    return combine(bundle, [latticeIndex(h, i0, j0)], [1.0]);
  }
  if (rem === 1) {
    // upward cell: vertices (i0+1,j0), (i0,j0+1), (i0,j0) with k0+1
    const nodes = [latticeIndex(h, i0 + 1, j0), latticeIndex(h, i0, j0 + 1), latticeIndex(h, i0, j0)];
    return combine(bundle, nodes, [f1, f2, f3]);
  }
  // rem === 2: downward cell
  const nodes = [
    latticeIndex(h, i0, j0 + 1),
    latticeIndex(h, i0 + 1, j0),
    latticeIndex(h, i0 + 1, j0 + 1),
  ];
  return combine(bundle, nodes, [1 - f1, 1 - f2, 1 - f3]);
}

/** Interpolated (x, F) for a preference; exact at grid nodes. */
export function lookup(bundle: UiBundle, lam: number[]): LookupResult {
  if (bundle.problem.m === 2) {
    return lookup2d(bundle, lam[0]);
  }
  return lookup3d(bundle, lam);
}
