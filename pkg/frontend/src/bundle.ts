/** Bundle schema: the exported (preference, solution, objectives) mesh the explorer consumes. */

export const SUPPORTED_SCHEMA = 1;

export interface VariantMeta {
  variant: "plain" | "shared" | "relation" | "chain";
  shared_idx?: number[];
  shared_values?: number[];
  base_idx?: number[];
  relation?: "sine" | "poly";
  alpha?: number[];
  beta?: number[];
  vertices?: number[][];
}

export interface UiBundle {
  schema_version: number;
  kind: string;
  problem: { name: string; n: number; m: number };
  bounds: { lower: number[]; upper: number[] };
  ideal: number[];
  nadir: number[];
  variant: VariantMeta;
  reference_front: number[][] | null;
  grid: {
    lattice_h: number | null;
    lambdas: number[][];
    xs: number[][];
    fs: number[][];
  };
  consistency: { reeval_max_abs_err: number };
}

export class BundleError extends Error {}

/** Parse and validate a bundle document; throws BundleError with a reason. */
export function parseBundle(doc: unknown): UiBundle {
  const b = doc as UiBundle;
  if (typeof b !== "object" || b === null) {
    throw new BundleError("not a JSON object");
  }
  if (b.schema_version !== SUPPORTED_SCHEMA) {
    throw new BundleError(
      `unsupported schema version ${String(b.schema_version)} (expected ${SUPPORTED_SCHEMA})`,
    );
  }
  if (b.kind !== "ui-bundle") {
    throw new BundleError(`not a UI bundle: kind=${String(b.kind)}`);
  }
  const g = b.grid;
  if (!g || !Array.isArray(g.lambdas) || g.lambdas.length === 0) {
    throw new BundleError("bundle grid is empty");
  }
  if (g.xs.length !== g.lambdas.length || g.fs.length !== g.lambdas.length) {
    throw new BundleError("grid arrays disagree in length");
  }
  const m = b.problem.m;
  if (m === 2) {
    for (let i = 1; i < g.lambdas.length; i++) {
      if (!(g.lambdas[i][0] > g.lambdas[i - 1][0])) {
        throw new BundleError("m=2 grid must be sorted by the first preference component");
      }
    }
  } else if (m === 3) {
    if (!g.lattice_h || g.lattice_h < 1) {
      throw new BundleError("m=3 bundle needs a lattice parameter");
    }
    const count = ((g.lattice_h + 1) * (g.lattice_h + 2)) / 2;
    if (count !== g.lambdas.length) {
      throw new BundleError(
        `lattice size mismatch: h=${g.lattice_h} implies ${count} nodes, got ${g.lambdas.length}`,
      );
    }
  } else {
    throw new BundleError(`unsupported objective count m=${m}`);
  }
  return b;
}
