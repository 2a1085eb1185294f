// DOM wiring: state lives here, every number shown comes from the last
// service response, and at most one search is in flight at a time.

import { ApiClient } from "./api";
import { buildForm, buildQuery, type FormInputs, type FormModel } from "./form";
import { computeScatter, defaultAxes } from "./scatter";
import {
  renderAxisChoosers,
  renderForm,
  renderIntervals,
  renderScatterSvg,
  renderSpacesTable,
  renderVariantsPanel,
} from "./render";
import type { QueryJson, SearchResponse, SpaceDetail, SuggestIntervalsResponse } from "./types";
import * as whatif from "./whatif";

const api = new ApiClient("");

interface AppState {
  spaceId: string | number | null;
  space: SpaceDetail | null;
  form: FormModel | null;
  inputs: FormInputs;
  errors: Record<number, string>;
  collapsed: Set<string>;
  k: number;
  metric: "manhattan" | "euclidean";
  lastQuery: QueryJson | null;
  lastSearch: SearchResponse | null;
  lastIntervals: SuggestIntervalsResponse | null;
  axes: [number, number] | null; // user override; null = default axes
  whatIf: whatif.WhatIfState;
  searching: boolean;
}

const state: AppState = {
  spaceId: null,
  space: null,
  form: null,
  inputs: {},
  errors: {},
  collapsed: new Set(),
  k: 1000,
  metric: "euclidean",
  lastQuery: null,
  lastSearch: null,
  lastIntervals: null,
  axes: null,
  whatIf: whatif.emptyState(),
  searching: false,
};

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
}

function setStatus(text: string, isError = false): void {
  const status = el("status");
  status.textContent = text;
  status.className = isError ? "status error" : "status";
}

async function loadSpaces(): Promise<void> {
  try {
    const spaces = await api.listSpaces();
    el("spaces").innerHTML = renderSpacesTable(spaces);
  } catch (error) {
    setStatus(`cannot list spaces: ${error}`, true);
  }
}

async function selectSpace(id: string | number): Promise<void> {
  try {
    const space = await api.getSpace(id);
    state.spaceId = id;
    state.space = space;
    state.form = buildForm(space);
    state.inputs = {};
    state.errors = {};
    state.lastQuery = null;
    state.lastSearch = null;
    state.lastIntervals = null;
    state.axes = null;
    state.whatIf = whatif.emptyState();
    el("space-title").textContent = `${space.name["en"] ?? space.ul} — v${space.version}, ${space.dvs} vectors`;
    redrawForm();
    el("results").innerHTML = "";
    el("whatif").innerHTML = "";
    setStatus(`selected ${space.ul}`);
  } catch (error) {
    setStatus(`cannot open space: ${error}`, true);
  }
}

function redrawForm(): void {
  if (!state.form) return;
  el("form").innerHTML = renderForm(state.form, state.inputs, state.errors, state.collapsed);
}

function readFormInputs(): void {
  document.querySelectorAll<HTMLInputElement>("#form input.constraint").forEach((input) => {
    const dim = Number(input.dataset.dim);
    const field = input.dataset.field as "sim" | "min" | "max";
    state.inputs[dim] = { ...state.inputs[dim], [field]: input.value };
  });
}

async function runSearch(): Promise<void> {
  if (!state.form || state.spaceId === null || state.searching) return;
  readFormInputs();
  state.k = Number((el("k-input") as HTMLInputElement).value) || 1000;
  state.metric = (el("metric-select") as HTMLSelectElement).value as AppState["metric"];
  const built = buildQuery(state.form, state.inputs, state.k, state.metric);
  state.errors = built.errors;
  redrawForm();
  if (!built.ok || !built.query) {
    setStatus("fix the highlighted fields", true);
    return;
  }
  state.searching = true;
  setStatus("searching…");
  try {
    const result = await api.search(state.spaceId, built.query);
    if (result.stale) return; // superseded by a newer search
    state.lastQuery = built.query;
    state.lastSearch = result.data;
    drawResults();
    setStatus(`${result.data.total} hits`);
  } catch (error) {
    setStatus(`search failed: ${error}`, true);
  } finally {
    state.searching = false;
  }
}

function drawResults(): void {
  if (!state.lastSearch || !state.lastQuery || !state.space) return;
  const dims = state.space.flattened;
  const [xDim, yDim] = state.axes ?? defaultAxes(state.lastQuery, dims);
  const sim = state.lastQuery.constraints;
  const queryPoint =
    sim[String(xDim)]?.sim !== undefined && sim[String(yDim)]?.sim !== undefined
      ? { x: Number(sim[String(xDim)].sim), y: Number(sim[String(yDim)].sim) }
      : null;
  const scatter = computeScatter(state.lastSearch.hits, xDim, yDim, queryPoint);
  el("results").innerHTML =
    `<div class="controls">${renderAxisChoosers(dims, [xDim, yDim])}</div>` +
    renderScatterSvg(
      scatter,
      dims[xDim]?.keyword ?? `dim ${xDim}`,
      dims[yDim]?.keyword ?? `dim ${yDim}`,
    ) + `<p class="hint">${state.lastSearch.total} hits plotted on dimensions ${xDim} and ${yDim}</p>`;
}

async function suggestIntervals(): Promise<void> {
  if (!state.form || state.spaceId === null || !state.lastQuery) {
    setStatus("run a search first; its sim values become interval centers", true);
    return;
  }
  const centers: Record<string, unknown> = {};
  for (const [j, c] of Object.entries(state.lastQuery.constraints)) {
    if (c.sim !== undefined) centers[j] = c.sim;
  }
  if (Object.keys(centers).length === 0) {
    setStatus("no sim values to center intervals on", true);
    return;
  }
  const ranges: Record<string, unknown> = {};
  for (const [j, c] of Object.entries(state.lastQuery.constraints)) {
    const entry: Record<string, unknown> = {};
    if (c.min !== undefined) entry["min"] = c.min;
    if (c.max !== undefined) entry["max"] = c.max;
    if (Object.keys(entry).length) ranges[j] = entry;
  }
  try {
    const response = await api.suggestIntervals(state.spaceId, {
      constraints: Object.keys(ranges).length ? ranges : centersAsWideRanges(),
      centers,
    });
    state.lastIntervals = response;
    for (const [j, interval] of Object.entries(response.intervals)) {
      state.whatIf = whatif.setPrecondition(state.whatIf, Number(j),
                                            whatif.fromResponse(interval));
    }
    drawWhatIf();
    setStatus(`intervals over a group of ${response.group_size}`);
  } catch (error) {
    setStatus(`interval suggestion failed: ${error}`, true);
  }
}

function centersAsWideRanges(): Record<string, unknown> {
  // Without explicit ranges the group is the whole space; constrain by
  // declared bounds where available so the request stays valid.
  const out: Record<string, unknown> = {};
  if (!state.space) return out;
  for (const dim of state.space.flattened) {
    if (dim.min !== undefined || dim.max !== undefined) {
      out[String(dim.index)] = {
        ...(dim.min !== undefined ? { min: dim.min } : {}),
        ...(dim.max !== undefined ? { max: dim.max } : {}),
      };
      break;
    }
  }
  return out;
}

function drawWhatIf(): void {
  if (!state.space) return;
  const dims = state.space.flattened;
  let html = "";
  if (state.lastIntervals) {
    html += renderIntervals(state.lastIntervals, dims);
  }
  html += `<div class="variant-controls">
<label>decision dim <input id="variant-dim" size="4"></label>
<label>center <input id="variant-center" size="8"></label>
<label>result dims <input id="result-dims" size="8" value="${state.whatIf.resultDims.join(",")}"></label>
<button id="add-variant">add variant</button>
<button id="evaluate">evaluate</button>
</div>`;
  if (state.whatIf.variants.length) {
    html += renderVariantsPanel(state.whatIf, dims);
  }
  el("whatif").innerHTML = html;
}

async function evaluate(): Promise<void> {
  if (state.spaceId === null) return;
  const resultDimsRaw = (el("result-dims") as HTMLInputElement).value;
  state.whatIf = {
    ...state.whatIf,
    resultDims: resultDimsRaw
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean)
      .map(Number),
  };
  try {
    const response = await api.evaluateVariants(
      state.spaceId,
      whatif.evaluatePayload(state.whatIf),
    );
    state.whatIf = whatif.withResults(state.whatIf, response);
    drawWhatIf();
    setStatus(`evaluated ${response.variants.length} variants`);
  } catch (error) {
    setStatus(`evaluation failed: ${error}`, true);
  }
}

function wireEvents(): void {
  el("spaces").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains("space-link")) return;
    event.preventDefault();
    const row = target.closest<HTMLElement>(".space-row");
    if (row?.dataset.space) void selectSpace(row.dataset.space);
  });
  el("form").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains("group-toggle")) return;
    const group = target.closest<HTMLElement>(".group-row")?.dataset.group;
    if (!group) return;
    readFormInputs();
    if (state.collapsed.has(group)) state.collapsed.delete(group);
    else state.collapsed.add(group);
    redrawForm();
  });
  el("search-button").addEventListener("click", () => void runSearch());
  el("suggest-button").addEventListener("click", () => void suggestIntervals());
  el("results").addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement;
    if (!target.classList.contains("axis") || !state.lastQuery || !state.space) return;
    const current = state.axes ?? defaultAxes(state.lastQuery, state.space.flattened);
    const next: [number, number] = [current[0], current[1]];
    next[Number(target.dataset.axis)] = Number(target.value);
    state.axes = next;
    drawResults();
  });
  el("whatif").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "add-variant") {
      const dim = Number((el("variant-dim") as HTMLInputElement).value);
      const center = Number((el("variant-center") as HTMLInputElement).value);
      if (Number.isFinite(dim) && Number.isFinite(center)) {
        state.whatIf = whatif.addVariant(state.whatIf, {
          label: `variant ${state.whatIf.variants.length + 1}`,
          intervals: { [dim]: { center, spread: 0, factor: 1 } },
        });
        drawWhatIf();
      }
    } else if (target.id === "evaluate") {
      void evaluate();
    } else if (target.classList.contains("adopt")) {
      const adopted = whatif.adoptVariant(state.whatIf, Number(target.dataset.variant));
      for (const [dim, fields] of Object.entries(adopted)) {
        state.inputs[Number(dim)] = { ...state.inputs[Number(dim)], ...fields };
      }
      redrawForm();
      setStatus("variant adopted into the query form");
    }
  });
  el("whatif").addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    if (target.classList.contains("variant-center")) {
      state.whatIf = whatif.shiftVariantInterval(
        state.whatIf,
        Number(target.dataset.variant),
        Number(target.dataset.dim),
        Number(target.value),
      );
      drawWhatIf();
    }
  });
}

wireEvents();
void loadSpaces();
