import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { BundleError, parseBundle, UiBundle } from "../src/bundle.js";
import { latticeIndex, lookup } from "../src/lookup.js";

function fixture(name: string): UiBundle {
  const raw = readFileSync(join(__dirname, "fixtures", name), "utf-8");
  return parseBundle(JSON.parse(raw));
}

const syn = fixture("bundle_syn_plain.json");
const synShared = fixture("bundle_syn_shared.json");
const re37 = fixture("bundle_re37_plain.json");

describe("bundle validation", () => {
  it("accepts exported bundles", () => {
    expect(syn.problem.m).toBe(2);
    expect(re37.problem.m).toBe(3);
  });

  it("rejects wrong schema versions with an explicit error", () => {
    const doc = JSON.parse(JSON.stringify(syn));
    doc.schema_version = 99;
    expect(() => parseBundle(doc)).toThrowError(BundleError);
    expect(() => parseBundle(doc)).toThrowError(/schema version/);
  });

  it("rejects empty grids and non-bundles", () => {
    const doc = JSON.parse(JSON.stringify(syn));
    doc.grid.lambdas = [];
    expect(() => parseBundle(doc)).toThrowError(/empty/);
    expect(() => parseBundle({ schema_version: 1, kind: "other" })).toThrowError(/not a UI bundle/);
  });
});

describe("lookup, two objectives", () => {
  it("is exact at every grid node", () => {
    syn.grid.lambdas.forEach((lam, i) => {
      const r = lookup(syn, lam);
      expect(r.x).toEqual(syn.grid.xs[i]);
      expect(r.f).toEqual(syn.grid.fs[i]);
    });
  });

  it("returns the convex combination of the two adjacent nodes", () => {
    const a = syn.grid.lambdas[4][0];
    const b = syn.grid.lambdas[5][0];
    const mid = a + 0.5 * (b - a);
    const r = lookup(syn, [mid, 1 - mid]);
    for (let i = 0; i < r.x.length; i++) {
      expect(r.x[i]).toBeCloseTo(0.5 * (syn.grid.xs[4][i] + syn.grid.xs[5][i]), 12);
    }
    expect(r.nodes).toEqual([4, 5]);
    expect(r.weights[0]).toBeCloseTo(0.5, 9);
  });

  it("clamps a slider sweep inside the grid envelope", () => {
    let loF = [Infinity, Infinity];
    let hiF = [-Infinity, -Infinity];
    for (const f of syn.grid.fs) {
      loF = loF.map((v, i) => Math.min(v, f[i]));
      hiF = hiF.map((v, i) => Math.max(v, f[i]));
    }
    for (let l1 = 0; l1 <= 1.0001; l1 += 0.01) {
      const r = lookup(syn, [l1, 1 - l1]);
      r.f.forEach((v, i) => {
        expect(v).toBeGreaterThanOrEqual(loF[i] - 1e-12);
        expect(v).toBeLessThanOrEqual(hiF[i] + 1e-12);
      });
      const wsum = r.weights.reduce((s, w) => s + w, 0);
      expect(wsum).toBeCloseTo(1, 12);
    }
  });

  it("keeps the shared coordinate constant across a full sweep", () => {
    const sharedIdx = synShared.variant.shared_idx![0];
    const first = lookup(synShared, [0, 1]).x[sharedIdx];
    // bit-exact at grid nodes; between nodes the convex combination of two
    // bit-identical values may differ by one ulp
    synShared.grid.lambdas.forEach((lam) => {
      expect(lookup(synShared, lam).x[sharedIdx]).toBe(first);
    });
    for (let l1 = 0; l1 <= 1.0001; l1 += 0.005) {
      const v = lookup(synShared, [l1, 1 - l1]).x[sharedIdx];
      expect(Math.abs(v - first)).toBeLessThanOrEqual(Math.abs(first) * Number.EPSILON);
    }
  });
});

describe("lookup, three objectives", () => {
  it("indexes the lattice consistently with the exporter", () => {
    const h = re37.grid.lattice_h!;
    let flat = 0;
    for (let i = 0; i <= h; i++) {
      for (let j = 0; j <= h - i; j++) {
        expect(latticeIndex(h, i, j)).toBe(flat);
        const lam = re37.grid.lambdas[flat];
        // node coordinates match (i, j, k)/h up to the exporter's clipping
        expect(lam[0]).toBeCloseTo(i / h, 4);
        expect(lam[1]).toBeCloseTo(j / h, 4);
        flat += 1;
      }
    }
    expect(flat).toBe(re37.grid.lambdas.length);
  });

  it("is exact at every lattice node", () => {
    const h = re37.grid.lattice_h!;
    let flat = 0;
    for (let i = 0; i <= h; i++) {
      for (let j = 0; j <= h - i; j++) {
        const r = lookup(re37, [i / h, j / h, (h - i - j) / h]);
        expect(r.x).toEqual(re37.grid.xs[flat]);
        expect(r.f).toEqual(re37.grid.fs[flat]);
        flat += 1;
      }
    }
  });

  it("interpolates interior points with convex weights", () => {
    const probes = [
      [0.4, 0.35, 0.25],
      [0.11, 0.52, 0.37],
      [0.8, 0.1, 0.1],
      [1 / 3, 1 / 3, 1 / 3],
    ];
    for (const lam of probes) {
      const r = lookup(re37, lam);
      const wsum = r.weights.reduce((s, w) => s + w, 0);
      expect(wsum).toBeCloseTo(1, 9);
      r.weights.forEach((w) => {
        expect(w).toBeGreaterThanOrEqual(-1e-12);
        expect(w).toBeLessThanOrEqual(1 + 1e-12);
      });
      // reconstructed preference agrees with the query (lattice is exact)
      r.lambda.forEach((v, i) => expect(v).toBeCloseTo(lam[i], 4));
    }
  });

  it("projects off-simplex queries instead of failing", () => {
    const r = lookup(re37, [0.6, 0.55, -0.05]);
    const wsum = r.weights.reduce((s, w) => s + w, 0);
    expect(wsum).toBeCloseTo(1, 9);
  });
});
