/** SVG panel builders. Pure string generation so views are testable without a DOM. */

import { UiBundle } from "./bundle.js";
import { LookupResult } from "./lookup.js";

export interface PanelSize {
  width: number;
  height: number;
  pad: number;
}

const DEFAULT_SIZE: PanelSize = { width: 420, height: 360, pad: 42 };

interface Scale {
  (v: number): number;
}

function linScale(lo: number, hi: number, out0: number, out1: number): Scale {
  const span = hi - lo || 1;
  return (v) => out0 + ((v - lo) / span) * (out1 - out0);
}

function extent(rows: number[][], col: number): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const r of rows) {
    if (r[col] < lo) lo = r[col];
    if (r[col] > hi) hi = r[col];
  }
  const margin = 0.05 * (hi - lo || 1);
  return [lo - margin, hi + margin];
}

function axisLabels(sx: Scale, sy: Scale, xl: string, yl: string, size: PanelSize): string {
  return (
    `<line x1="${size.pad}" y1="${size.height - size.pad}" x2="${size.width - 10}" ` +
    `y2="${size.height - size.pad}" class="axis"/>` +
    `<line x1="${size.pad}" y1="${size.height - size.pad}" x2="${size.pad}" y2="10" class="axis"/>` +
    `<text x="${size.width / 2}" y="${size.height - 8}" class="label">${xl}</text>` +
    `<text x="12" y="${size.height / 2}" class="label" transform="rotate(-90 12 ${size.height / 2})">${yl}</text>`
  );
}

/** Objective-space panel: grid front(s), reference front, current marker.
 *  m=2 plots f1 vs f2; m=3 plots f1 vs f2 with f3 as color; m>3 falls back
 *  to parallel coordinates. */
export function objectivePanel(
  bundles: UiBundle[],
  marks: (LookupResult | null)[],
  size: PanelSize = DEFAULT_SIZE,
): string {
  const m = bundles[0].problem.m;
  if (m > 3) {
    const rows = bundles[0].grid.fs;
    return parallelPanel(rows, marks[0] ? marks[0].f : null, rowLabels(m, "f"), size);
  }
  const all: number[][] = [];
  for (const b of bundles) {
    all.push(...b.grid.fs);
    if (b.reference_front) all.push(...b.reference_front);
  }
  const [x0, x1] = extent(all, 0);
  const [y0, y1] = extent(all, 1);
  const sx = linScale(x0, x1, size.pad, size.width - 10);
  const sy = linScale(y0, y1, size.height - size.pad, 10);
  let body = "";
  bundles.forEach((b, bi) => {
    if (b.reference_front) {
      const pts = [...b.reference_front].sort((p, q) => p[0] - q[0]);
      const path = pts.map((p, i) => `${i ? "L" : "M"}${sx(p[0]).toFixed(1)},${sy(p[1]).toFixed(1)}`).join("");
      body += `<path d="${path}" class="ref ref-${bi}" fill="none"/>`;
    }
    for (const f of b.grid.fs) {
      const color = m === 3 ? ` style="fill:${heat(f[2], all)}"` : "";
      body += `<circle cx="${sx(f[0]).toFixed(1)}" cy="${sy(f[1]).toFixed(1)}" r="2.4" class="pt pt-${bi}"${color}/>`;
    }
    const mark = marks[bi];
    if (mark) {
      body += `<circle cx="${sx(mark.f[0]).toFixed(1)}" cy="${sy(mark.f[1]).toFixed(1)}" r="7" class="mark mark-${bi}"/>`;
    }
  });
  return svg(size, axisLabels(sx, sy, "f1", "f2", size) + body);
}

function heat(v: number, all: number[][]): string {
  let lo = Infinity;
  let hi = -Infinity;
  for (const r of all) {
    if (r.length > 2) {
      if (r[2] < lo) lo = r[2];
      if (r[2] > hi) hi = r[2];
    }
  }
  const t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  const hue = 240 - 200 * t;
  return `hsl(${hue.toFixed(0)},70%,50%)`;
}

function rowLabels(count: number, prefix: string): string[] {
  return Array.from({ length: count }, (_, i) => `${prefix}${i + 1}`);
}

/** Decision-space panel: parallel coordinates of all grid solutions with the
 *  current solution highlighted; shared/dependent coordinates flagged. */
export function decisionPanel(
  bundle: UiBundle,
  mark: LookupResult | null,
  size: PanelSize = DEFAULT_SIZE,
): string {
  return parallelPanel(
    bundle.grid.xs,
    mark ? mark.x : null,
    rowLabels(bundle.problem.n, "x"),
    size,
    flaggedAxes(bundle),
    bundle.bounds,
  );
}

export function flaggedAxes(bundle: UiBundle): Set<number> {
  const v = bundle.variant;
  const flagged = new Set<number>();
  if (v.variant === "shared" && v.shared_idx) v.shared_idx.forEach((i) => flagged.add(i));
  if (v.variant === "relation" && v.base_idx) {
    for (let i = 0; i < bundle.problem.n; i++) {
      if (!v.base_idx.includes(i)) flagged.add(i);
    }
  }
  return flagged;
}

function parallelPanel(
  rows: number[][],
  highlight: number[] | null,
  labels: string[],
  size: PanelSize,
  flagged: Set<number> = new Set(),
  bounds?: { lower: number[]; upper: number[] },
): string {
  const k = labels.length;
  const axisX = (i: number) => size.pad + (i * (size.width - size.pad - 14)) / Math.max(k - 1, 1);
  const scales: Scale[] = [];
  for (let i = 0; i < k; i++) {
    const [lo, hi] = bounds ? [bounds.lower[i], bounds.upper[i]] : extent(rows, i);
    scales.push(linScale(lo, hi, size.height - size.pad, 12));
  }
  let body = "";
  for (let i = 0; i < k; i++) {
    const cls = flagged.has(i) ? "axis flagged" : "axis";
    body += `<line x1="${axisX(i)}" y1="12" x2="${axisX(i)}" y2="${size.height - size.pad}" class="${cls}"/>`;
    body += `<text x="${axisX(i)}" y="${size.height - 16}" class="label">${labels[i]}</text>`;
  }
  for (const row of rows) {
    const path = row
      .slice(0, k)
      .map((v, i) => `${i ? "L" : "M"}${axisX(i).toFixed(1)},${scales[i](v).toFixed(1)}`)
      .join("");
    body += `<path d="${path}" class="pline" fill="none"/>`;
  }
  if (highlight) {
    const path = highlight
      .slice(0, k)
      .map((v, i) => `${i ? "L" : "M"}${axisX(i).toFixed(1)},${scales[i](v).toFixed(1)}`)
      .join("");
    body += `<path d="${path}" class="pline-mark" fill="none"/>`;
  }
  return svg(size, body);
}

/** Numeric readout of the current preference, solution and objectives. */
export function readoutPanel(result: LookupResult | null): string {
  if (!result) return "<p class='muted'>load a bundle to explore</p>";
  const fmt = (arr: number[]) => arr.map((v) => v.toPrecision(5)).join(", ");
  return (
    `<dl><dt>preference</dt><dd>(${fmt(result.lambda)})</dd>` +
    `<dt>solution x</dt><dd>(${fmt(result.x)})</dd>` +
    `<dt>objectives F</dt><dd>(${fmt(result.f)})</dd></dl>`
  );
}

function svg(size: PanelSize, body: string): string {
  return (
    `<svg viewBox="0 0 ${size.width} ${size.height}" xmlns="http://www.w3.org/2000/svg">` +
    body +
    "</svg>"
  );
}
