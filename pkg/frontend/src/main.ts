/** App wiring: bundle loading, preference controls, debounced re-render. */

import { BundleError, parseBundle, UiBundle } from "./bundle.js";
import { lookup, LookupResult } from "./lookup.js";
import { decisionPanel, objectivePanel, readoutPanel } from "./render.js";

interface AppState {
  bundles: UiBundle[];
  lam: number[];
}

const state: AppState = { bundles: [], lam: [0.5, 0.5] };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(msg: string | null): void {
  const box = el<HTMLDivElement>("banner");
  box.textContent = msg ?? "";
  box.style.display = msg ? "block" : "none";
}

function currentPreference(): number[] {
  const m = state.bundles[0].problem.m;
  const l1 = Number(el<HTMLInputElement>("slider-1").value);
  if (m === 2) return [l1, 1 - l1];
  const l2 = Number(el<HTMLInputElement>("slider-2").value);
  const rest = Math.max(1 - l1 - l2, 0);
  const s = l1 + l2 + rest || 1;
  return [l1 / s, l2 / s, rest / s];
}

let pending = 0;

function scheduleRender(): void {
  // debounce to one render per frame while a slider is dragged
  if (pending) return;
  pending = window.requestAnimationFrame(() => {
    pending = 0;
    render();
  });
}

function render(): void {
  if (state.bundles.length === 0) {
    el("readout").innerHTML = readoutPanel(null);
    return;
  }
  state.lam = currentPreference();
  const marks: (LookupResult | null)[] = state.bundles.map((b) => lookup(b, state.lam));
  el("objective-panel").innerHTML = objectivePanel(state.bundles, marks);
  el("decision-panel").innerHTML = decisionPanel(state.bundles[0], marks[0]);
  el("readout").innerHTML = readoutPanel(marks[0]);
  const legend = state.bundles
    .map((b, i) => `<span class="swatch swatch-${i}"></span>${b.problem.name}/${b.variant.variant}`)
    .join(" &nbsp; ");
  el("legend").innerHTML = legend;
}

function setupSliders(): void {
  const m = state.bundles[0].problem.m;
  el("slider-2-row").style.display = m === 3 ? "flex" : "none";
  el<HTMLInputElement>("slider-1").disabled = false;
  el<HTMLInputElement>("slider-2").disabled = m !== 3;
}

async function addBundleFile(file: File): Promise<void> {
  try {
    const doc = JSON.parse(await file.text());
    const bundle = parseBundle(doc);
    if (state.bundles.length > 0 && bundle.problem.m !== state.bundles[0].problem.m) {
      throw new BundleError("overlayed bundles must share the objective count");
    }
    state.bundles.push(bundle);
    if (state.bundles.length > 2) state.bundles.shift();
    banner(null);
    setupSliders();
    render();
  } catch (err) {
    banner(err instanceof BundleError ? `bundle rejected: ${err.message}` : `load failed: ${String(err)}`);
  }
}

async function loadFromUrl(url: string): Promise<void> {
  try {
    const resp = await fetch(url);
    const bundle = parseBundle(await resp.json());
    state.bundles = [bundle];
    banner(null);
    setupSliders();
    render();
  } catch (err) {
    banner(err instanceof BundleError ? `bundle rejected: ${err.message}` : `load failed: ${String(err)}`);
  }
}

export function start(): void {
  el<HTMLInputElement>("file-input").addEventListener("change", (ev) => {
    const files = (ev.target as HTMLInputElement).files;
    if (files) {
      for (const f of Array.from(files)) void addBundleFile(f);
    }
  });
  el<HTMLButtonElement>("clear-btn").addEventListener("click", () => {
    state.bundles = [];
    el("objective-panel").innerHTML = "";
    el("decision-panel").innerHTML = "";
    el("legend").innerHTML = "";
    render();
  });
  el<HTMLInputElement>("slider-1").addEventListener("input", scheduleRender);
  el<HTMLInputElement>("slider-2").addEventListener("input", scheduleRender);
  const param = new URLSearchParams(window.location.search).get("bundle");
  if (param) void loadFromUrl(param);
  render();
}

start();
