// Scatter geometry: map the service's hit list onto two chosen dimensions.
// Pure arithmetic; the SVG is assembled in render.ts from these points.

import type { FlatDimension, HitJson, QueryJson } from "./types";

export interface ScatterPoint {
  recordId: number;
  x: number;
  y: number;
  px: number;
  py: number;
}

export interface ScatterModel {
  points: ScatterPoint[];
  /** Hits absent on one of the plotted dimensions; shown in a footnote. */
  omitted: number;
  query: { x: number; y: number; px: number; py: number } | null;
  xTicks: { value: number; px: number }[];
  yTicks: { value: number; py: number }[];
  width: number;
  height: number;
}

/**
 * Default plot axes: the two similarity dimensions with the largest
 * weights (ties by index), padded with the first comparable dimensions
 * when fewer than two carry a sim constraint.
 */
export function defaultAxes(query: QueryJson, dims: FlatDimension[]): [number, number] {
  const simDims = Object.entries(query.constraints)
    .filter(([, c]) => c.sim !== undefined)
    .map(([j]) => Number(j));
  const weightOf = (j: number) =>
    Number(query.weights?.[String(j)] ?? dims[j]?.weight ?? 1);
  simDims.sort((a, b) => weightOf(b) - weightOf(a) || a - b);
  const axes = simDims.slice(0, 2);
  for (const dim of dims) {
    if (axes.length >= 2) break;
    if (dim.representation !== "text" && !axes.includes(dim.index)) {
      axes.push(dim.index);
    }
  }
  while (axes.length < 2) axes.push(0);
  return [axes[0], axes[1]];
}

function numericValue(values: (number | string | null)[], j: number): number | null {
  const v = values[j];
  if (v === null || v === undefined) return null;
  const n = Number(v);
  return Number.isFinite(n) ? n : null;
}

function ticks(lo: number, hi: number, count = 5): number[] {
  if (lo === hi) return [lo];
  const step = (hi - lo) / (count - 1);
  return Array.from({ length: count }, (_, i) => lo + i * step);
}

export function computeScatter(
  hits: HitJson[],
  xDim: number,
  yDim: number,
  queryPoint: { x: number; y: number } | null,
  width = 420,
  height = 420,
  padding = 40,
): ScatterModel {
  const raw: { recordId: number; x: number; y: number }[] = [];
  let omitted = 0;
  for (const hit of hits) {
    const x = numericValue(hit.values, xDim);
    const y = numericValue(hit.values, yDim);
    if (x === null || y === null) {
      omitted += 1;
      continue;
    }
    raw.push({ recordId: hit.record_id, x, y });
  }
  const xs = raw.map((p) => p.x).concat(queryPoint ? [queryPoint.x] : []);
  const ys = raw.map((p) => p.y).concat(queryPoint ? [queryPoint.y] : []);
  const xLo = xs.length ? Math.min(...xs) : 0;
  const xHi = xs.length ? Math.max(...xs) : 1;
  const yLo = ys.length ? Math.min(...ys) : 0;
  const yHi = ys.length ? Math.max(...ys) : 1;
  const sx = (x: number) =>
    xHi === xLo
      ? width / 2
      : padding + ((x - xLo) / (xHi - xLo)) * (width - 2 * padding);
  const sy = (y: number) =>
    yHi === yLo
      ? height / 2
      : height - padding - ((y - yLo) / (yHi - yLo)) * (height - 2 * padding);
  return {
    points: raw.map((p) => ({ ...p, px: sx(p.x), py: sy(p.y) })),
    omitted,
    query: queryPoint
      ? { ...queryPoint, px: sx(queryPoint.x), py: sy(queryPoint.y) }
      : null,
    xTicks: ticks(xLo, xHi).map((value) => ({ value, px: sx(value) })),
    yTicks: ticks(yLo, yHi).map((value) => ({ value, py: sy(value) })),
    width,
    height,
  };
}
