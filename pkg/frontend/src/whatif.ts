// What-if loop state: precondition intervals, decision variants, and the
// last evaluation. Re-running an unchanged state must reproduce identical
// statistics (the service is deterministic); adopting a variant folds its
// intervals back into the next query's range fields.

import type { EvaluateVariantsResponse, IntervalJson, StatsResponse } from "./types";

export interface IntervalEdit {
  center: number;
  spread: number;
  factor: number;
}

export interface Variant {
  label: string;
  intervals: Record<number, IntervalEdit>;
}

export interface WhatIfState {
  preconditions: Record<number, IntervalEdit>;
  variants: Variant[];
  resultDims: number[];
  lastStats: StatsResponse[] | null;
}

export function emptyState(): WhatIfState {
  return { preconditions: {}, variants: [], resultDims: [], lastStats: null };
}

export function bounds(interval: IntervalEdit): { lower: number; upper: number } {
  const half = interval.factor * interval.spread;
  return { lower: interval.center - half, upper: interval.center + half };
}

export function isExact(interval: IntervalEdit): boolean {
  const { lower, upper } = bounds(interval);
  return lower === upper;
}

export function fromResponse(interval: IntervalJson): IntervalEdit {
  return { center: interval.center, spread: interval.spread, factor: interval.factor };
}

export function setPrecondition(
  state: WhatIfState,
  dim: number,
  interval: IntervalEdit,
): WhatIfState {
  return {
    ...state,
    preconditions: { ...state.preconditions, [dim]: interval },
    lastStats: null,
  };
}

/** Shift one variant's interval center; statistics become stale. */
export function shiftVariantInterval(
  state: WhatIfState,
  variantIndex: number,
  dim: number,
  newCenter: number,
): WhatIfState {
  const variants = state.variants.map((variant, i) => {
    if (i !== variantIndex) return variant;
    const existing = variant.intervals[dim] ?? { center: 0, spread: 0, factor: 1 };
    return {
      ...variant,
      intervals: { ...variant.intervals, [dim]: { ...existing, center: newCenter } },
    };
  });
  return { ...state, variants, lastStats: null };
}

export function addVariant(state: WhatIfState, variant: Variant): WhatIfState {
  return { ...state, variants: [...state.variants, variant], lastStats: null };
}

function intervalsToJson(
  intervals: Record<number, IntervalEdit>,
): Record<string, { center: number; spread: number; factor: number }> {
  return Object.fromEntries(
    Object.entries(intervals).map(([j, i]) => [
      j,
      { center: i.center, spread: i.spread, factor: i.factor },
    ]),
  );
}

/** Body for POST /spaces/{id}/evaluate-variants. */
export function evaluatePayload(state: WhatIfState): unknown {
  return {
    preconditions: intervalsToJson(state.preconditions),
    variants: state.variants.map((v) => intervalsToJson(v.intervals)),
    result_dims: state.resultDims,
  };
}

export function withResults(
  state: WhatIfState,
  response: EvaluateVariantsResponse,
): WhatIfState {
  return { ...state, lastStats: response.variants };
}

/**
 * Adopt a variant into the next query: its intervals (and the shared
 * preconditions) become min/max range inputs, closing the loop.
 */
export function adoptVariant(
  state: WhatIfState,
  variantIndex: number,
): Record<number, { min: string; max: string }> {
  const variant = state.variants[variantIndex];
  if (!variant) return {};
  const merged: Record<number, IntervalEdit> = {
    ...state.preconditions,
    ...variant.intervals,
  };
  const out: Record<number, { min: string; max: string }> = {};
  for (const [j, interval] of Object.entries(merged)) {
    const { lower, upper } = bounds(interval);
    out[Number(j)] = { min: String(lower), max: String(upper) };
  }
  return out;
}
