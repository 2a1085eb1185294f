// HTML renderers. Pure string builders so tests can assert that every
// number on screen is lifted verbatim from a service response.

import type { FormModel, FormInputs } from "./form";
import type { ScatterModel } from "./scatter";
import type { WhatIfState } from "./whatif";
import { bounds, isExact } from "./whatif";
import type {
  FlatDimension,
  SpaceSummary,
  StatsResponse,
  SuggestIntervalsResponse,
} from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function displayName(name: Record<string, string>): string {
  return name["en"] ?? Object.values(name)[0] ?? "(unnamed)";
}

export function renderSpacesTable(spaces: SpaceSummary[]): string {
  const rows = spaces
    .map(
      (s) => `<tr class="space-row" data-space="${s.index ?? s.hash}">
  <td class="num"><a href="#" class="space-link">${s.index ?? "·"}</a></td>
  <td>${escapeHtml(displayName(s.name))}</td>
  <td class="num">${s.dims}</td>
  <td class="num">${s.dvs}</td>
  <td class="mono">${escapeHtml(s.ul)}</td>
</tr>`,
    )
    .join("\n");
  return `<table class="spaces">
<thead><tr><th>index</th><th>space</th><th>dims</th><th>vectors</th><th>UL</th></tr></thead>
<tbody>${rows}</tbody>
</table>`;
}

function inputCell(dim: FlatDimension, field: "sim" | "min" | "max",
                   inputs: FormInputs, errors: Record<number, string>,
                   queryable: boolean): string {
  const raw = inputs[dim.index]?.[field] ?? "";
  const invalid = dim.index in errors ? " invalid" : "";
  const disabled = queryable ? "" : " disabled";
  const placeholder = dim.date_format ? ` placeholder="${escapeHtml(dim.date_format)}"` : "";
  return `<td><input class="constraint${invalid}" data-dim="${dim.index}" data-field="${field}"
 value="${escapeHtml(raw)}"${placeholder}${disabled}></td>`;
}

function boundsLabel(dim: FlatDimension): string {
  const parts = [];
  if (dim.min !== undefined) parts.push(`min ${dim.min}`);
  if (dim.max !== undefined) parts.push(`max ${dim.max}`);
  if (dim.enum_labels) parts.push(`${dim.enum_labels.length} labels`);
  return parts.join(", ");
}

export function renderForm(
  model: FormModel,
  inputs: FormInputs,
  errors: Record<number, string>,
  collapsedGroups: Set<string> = new Set(),
): string {
  const rows: string[] = [];
  let currentGroup = "";
  for (const row of model.rows) {
    if (row.group !== currentGroup) {
      currentGroup = row.group;
      if (row.group) {
        const collapsed = collapsedGroups.has(row.group) ? "▸" : "▾";
        rows.push(`<tr class="group-row" data-group="${escapeHtml(row.group)}">
  <td colspan="6"><button class="group-toggle">${collapsed}</button> ${escapeHtml(row.group)}</td>
</tr>`);
      }
    }
    if (row.group && collapsedGroups.has(row.group)) continue;
    const dim = row.dim;
    const unit = dim.unit ? ` <span class="unit">[${escapeHtml(dim.unit)}]</span>` : "";
    const note = row.queryable
      ? ""
      : row.kind === "unknown"
        ? ` <span class="note">unknown kind ${escapeHtml(dim.representation)}, read-only</span>`
        : ` <span class="note">text, not searchable</span>`;
    const error =
      dim.index in errors
        ? `<div class="error">${escapeHtml(errors[dim.index])}</div>`
        : "";
    rows.push(`<tr class="dim-row${row.group ? " nested" : ""}" data-dim="${dim.index}">
  <td class="num">${dim.index}</td>
  <td>${escapeHtml(dim.keyword)}${unit}${note}${error}</td>
  ${inputCell(dim, "sim", inputs, errors, row.queryable)}
  ${inputCell(dim, "min", inputs, errors, row.queryable)}
  ${inputCell(dim, "max", inputs, errors, row.queryable)}
  <td class="hint">${escapeHtml(boundsLabel(dim))}</td>
</tr>`);
  }
  const formErrors = errors[-1]
    ? `<div class="error form-error">${escapeHtml(errors[-1])}</div>`
    : "";
  return `${formErrors}<table class="query-form">
<thead><tr><th></th><th>dimension</th><th>sim</th><th>min</th><th>max</th><th></th></tr></thead>
<tbody>${rows.join("\n")}</tbody>
</table>`;
}

export function renderScatterSvg(model: ScatterModel, xLabel: string, yLabel: string): string {
  const dots = model.points
    .map(
      (p) =>
        `<circle cx="${p.px.toFixed(2)}" cy="${p.py.toFixed(2)}" r="2.4" class="dot">` +
        `<title>#${p.recordId} (${p.x}, ${p.y})</title></circle>`,
    )
    .join("");
  const query = model.query
    ? `<g class="query-mark" transform="translate(${model.query.px.toFixed(2)},${model.query.py.toFixed(2)})">
<line x1="-7" y1="0" x2="7" y2="0"/><line x1="0" y1="-7" x2="0" y2="7"/>
<title>query (${model.query.x}, ${model.query.y})</title></g>`
    : "";
  const xAxis = model.xTicks
    .map(
      (t) =>
        `<text x="${t.px.toFixed(2)}" y="${model.height - 12}" class="tick">${Number(t.value.toFixed(3))}</text>`,
    )
    .join("");
  const yAxis = model.yTicks
    .map((t) => `<text x="6" y="${t.py.toFixed(2)}" class="tick">${Number(t.value.toFixed(3))}</text>`)
    .join("");
  const omitted = model.omitted
    ? `<text x="${model.width / 2}" y="14" class="note">${model.omitted} hits lack a plotted value</text>`
    : "";
  return `<svg viewBox="0 0 ${model.width} ${model.height}" class="scatter" role="img">
<text x="${model.width / 2}" y="${model.height - 1}" class="axis-label">${escapeHtml(xLabel)}</text>
<text x="12" y="${model.height / 2}" class="axis-label" transform="rotate(-90 12 ${model.height / 2})">${escapeHtml(yLabel)}</text>
${xAxis}${yAxis}${dots}${query}${omitted}
</svg>`;
}

function statCell(value: string | null | undefined): string {
  return value === null || value === undefined ? "·" : escapeHtml(value);
}

/** Axis pickers for the scatter; only comparable dimensions are offered. */
export function renderAxisChoosers(dims: FlatDimension[], current: [number, number]): string {
  const options = (selected: number) =>
    dims
      .filter((d) => d.representation !== "text")
      .map(
        (d) =>
          `<option value="${d.index}"${d.index === selected ? " selected" : ""}>` +
          `${d.index} ${escapeHtml(d.keyword)}</option>`,
      )
      .join("");
  return `<label>x <select class="axis" data-axis="0">${options(current[0])}</select></label>
<label>y <select class="axis" data-axis="1">${options(current[1])}</select></label>`;
}

export function renderStatsTable(stats: StatsResponse, dims: FlatDimension[]): string {
  const rows = Object.entries(stats.dims)
    .map(([j, s]) => {
      const keyword = dims[Number(j)]?.keyword ?? `dim ${j}`;
      return `<tr><td>${escapeHtml(keyword)}</td><td class="num">${s.count}</td>
<td class="num">${statCell(s.mean)}</td><td class="num">${statCell(s.std)}</td></tr>`;
    })
    .join("\n");
  return `<table class="stats">
<caption>group of ${stats.n}</caption>
<thead><tr><th>dimension</th><th>count</th><th>mean</th><th>std</th></tr></thead>
<tbody>${rows}</tbody>
</table>`;
}

export function renderIntervals(response: SuggestIntervalsResponse,
                                dims: FlatDimension[]): string {
  const rows = Object.entries(response.intervals)
    .map(([j, interval]) => {
      const keyword = dims[Number(j)]?.keyword ?? `dim ${j}`;
      const badge = interval.exact ? ` <span class="badge">exact</span>` : "";
      const weight = response.weights[j] !== undefined
        ? String(response.weights[j])
        : "·";
      return `<tr data-dim="${j}"><td>${escapeHtml(keyword)}${badge}</td>
<td class="num">${interval.center}</td><td class="num">${interval.spread}</td>
<td class="num"><input class="factor" data-dim="${j}" value="${interval.factor}"></td>
<td class="num">[${interval.lower}, ${interval.upper}]</td>
<td class="num">${weight}</td></tr>`;
    })
    .join("\n");
  return `<table class="intervals">
<caption>suggested intervals (group of ${response.group_size})</caption>
<thead><tr><th>dimension</th><th>center</th><th>spread</th><th>factor</th><th>interval</th><th>weight</th></tr></thead>
<tbody>${rows}</tbody>
</table>`;
}

export function renderVariantsPanel(state: WhatIfState, dims: FlatDimension[]): string {
  const header = state.variants
    .map((v, i) => `<th>${escapeHtml(v.label)} <button class="adopt" data-variant="${i}">adopt</button></th>`)
    .join("");
  const intervalRows = Object.keys(
    Object.assign({}, ...state.variants.map((v) => v.intervals)),
  )
    .map(Number)
    .sort((a, b) => a - b)
    .map((dim) => {
      const cells = state.variants
        .map((variant, i) => {
          const interval = variant.intervals[dim];
          if (!interval) return "<td>·</td>";
          const { lower, upper } = bounds(interval);
          const badge = isExact(interval) ? ` <span class="badge">exact</span>` : "";
          return `<td><input class="variant-center" data-variant="${i}" data-dim="${dim}"
 value="${interval.center}"> <span class="hint">[${lower}, ${upper}]</span>${badge}</td>`;
        })
        .join("");
      const keyword = dims[dim]?.keyword ?? `dim ${dim}`;
      return `<tr><td>${escapeHtml(keyword)}</td>${cells}</tr>`;
    })
    .join("\n");
  const statRows = state.lastStats
    ? state.resultDims
        .map((dim) => {
          const keyword = dims[dim]?.keyword ?? `dim ${dim}`;
          const cells = state.lastStats!
            .map((stats) => {
              const s = stats.dims[String(dim)];
              if (!s) return "<td>·</td>";
              return `<td class="num">n=${stats.n} count=${s.count}<br>mean ${statCell(s.mean)}<br>std ${statCell(s.std)}</td>`;
            })
            .join("");
          return `<tr class="result"><td>${escapeHtml(keyword)} (result)</td>${cells}</tr>`;
        })
        .join("\n")
    : "";
  return `<table class="variants">
<thead><tr><th>decision dimension</th>${header}</tr></thead>
<tbody>${intervalRows}${statRows}</tbody>
</table>`;
}
