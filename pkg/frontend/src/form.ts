// Query form model, generated from a space definition. Pure: rendering
// and DOM wiring live elsewhere, so all of this is unit-testable.

import type { ConstraintJson, FlatDimension, QueryJson, SpaceDetail } from "./types";

export type FieldKind = "integer" | "decimal" | "list" | "date" | "text" | "unknown";

export function fieldKind(dim: FlatDimension): FieldKind {
  if (dim.date_format) return "date";
  switch (dim.representation) {
    case "list":
      return "list";
    case "text":
      return "text";
    case "money":
    case "float_medium":
    case "float_max":
      return "decimal";
    case "integer":
      return "integer";
    default:
      // A newer service may declare kinds this client predates; render
      // them read-only instead of guessing an input type.
      return "unknown";
  }
}

export function effectiveScale(dim: FlatDimension): number {
  if (dim.representation === "money") return 2;
  if (dim.scale !== undefined) return dim.scale;
  if (dim.representation === "float_medium") return 6;
  if (dim.representation === "float_max") return 15;
  return 0;
}

/** One input row of the form; text dimensions render but take no input. */
export interface FormRow {
  dim: FlatDimension;
  kind: FieldKind;
  /** Nesting group label chain derived from the flattening path. */
  group: string;
  queryable: boolean;
}

export interface FormModel {
  space: SpaceDetail;
  rows: FormRow[];
  groups: string[];
}

export function buildForm(space: SpaceDetail): FormModel {
  const rows: FormRow[] = [];
  const groups: string[] = [];
  for (const dim of space.flattened) {
    const kind = fieldKind(dim);
    const group = dim.path.length > 1 ? `group ${dim.path.slice(0, -1).join("/")}` : "";
    if (group && !groups.includes(group)) groups.push(group);
    rows.push({ dim, kind, group, queryable: kind !== "text" && kind !== "unknown" });
  }
  return { space, rows, groups };
}

// ---------------------------------------------------------------------------
// Field validation
// ---------------------------------------------------------------------------

export type Validated =
  | { ok: true; value: number | string | null }
  | { ok: false; error: string };

const DATE_PATTERNS: Record<string, RegExp> = {
  "yyyy-mm-dd hh:mm:ss": /^(\d{4})-(\d{2})-(\d{2}) (\d{2}):(\d{2}):(\d{2})$/,
  "yyyy-mm-dd hh:mm": /^(\d{4})-(\d{2})-(\d{2}) (\d{2}):(\d{2})$/,
  "yyyy-mm-dd hh": /^(\d{4})-(\d{2})-(\d{2}) (\d{2})$/,
  "yyyy-mm-dd": /^(\d{4})-(\d{2})-(\d{2})$/,
  "yyyy-mm": /^(\d{4})-(\d{2})$/,
  yyyy: /^(\d{4})$/,
  "hh:mm:ss": /^(\d{2}):(\d{2}):(\d{2})$/,
  "hh:mm": /^(\d{2}):(\d{2})$/,
};

/** Unit count for a formatted date string (epoch- or midnight-relative). */
export function parseDateValue(text: string, format: string): number | null {
  const pattern = DATE_PATTERNS[format];
  if (!pattern) return null;
  const match = pattern.exec(text.trim());
  if (!match) return null;
  const parts = match.slice(1).map(Number);
  switch (format) {
    case "hh:mm:ss":
      return parts[0] * 3600 + parts[1] * 60 + parts[2];
    case "hh:mm":
      return parts[0] * 60 + parts[1];
    case "yyyy":
      return parts[0] - 1970;
    case "yyyy-mm":
      return (parts[0] - 1970) * 12 + (parts[1] - 1);
  }
  const [y, mo, d, h = 0, mi = 0, s = 0] = parts;
  const ms = Date.UTC(y, mo - 1, d, h, mi, s);
  const divisor = { "yyyy-mm-dd hh:mm:ss": 1000, "yyyy-mm-dd hh:mm": 60_000,
                    "yyyy-mm-dd hh": 3_600_000, "yyyy-mm-dd": 86_400_000 }[format]!;
  return Math.floor(ms / divisor);
}

export function formatDateValue(count: number, format: string): string {
  const pad = (n: number, w = 2) => String(n).padStart(w, "0");
  switch (format) {
    case "hh:mm:ss":
      return `${pad(Math.floor(count / 3600))}:${pad(Math.floor(count / 60) % 60)}:${pad(count % 60)}`;
    case "hh:mm":
      return `${pad(Math.floor(count / 60))}:${pad(count % 60)}`;
    case "yyyy":
      return pad(count + 1970, 4);
    case "yyyy-mm": {
      const y = Math.floor(count / 12) + 1970;
      const mo = ((count % 12) + 12) % 12;
      return `${pad(y, 4)}-${pad(mo + 1)}`;
    }
  }
  const ms = { "yyyy-mm-dd hh:mm:ss": 1000, "yyyy-mm-dd hh:mm": 60_000,
               "yyyy-mm-dd hh": 3_600_000, "yyyy-mm-dd": 86_400_000 }[format]!;
  const date = new Date(count * ms);
  const base = `${pad(date.getUTCFullYear(), 4)}-${pad(date.getUTCMonth() + 1)}-${pad(date.getUTCDate())}`;
  switch (format) {
    case "yyyy-mm-dd":
      return base;
    case "yyyy-mm-dd hh":
      return `${base} ${pad(date.getUTCHours())}`;
    case "yyyy-mm-dd hh:mm":
      return `${base} ${pad(date.getUTCHours())}:${pad(date.getUTCMinutes())}`;
    default:
      return `${base} ${pad(date.getUTCHours())}:${pad(date.getUTCMinutes())}:${pad(date.getUTCSeconds())}`;
  }
}

function checkBounds(dim: FlatDimension, numeric: number): string | null {
  if (dim.min !== undefined && numeric < Number(dim.min)) {
    return `below minimum ${dim.min}`;
  }
  if (dim.max !== undefined && numeric > Number(dim.max)) {
    return `above maximum ${dim.max}`;
  }
  return null;
}

/** Validate one raw input against its dimension; empty input means unset. */
export function validateField(dim: FlatDimension, raw: string): Validated {
  const text = raw.trim();
  if (text === "") return { ok: true, value: null };
  const kind = fieldKind(dim);
  if (kind === "text") {
    return { ok: false, error: "text dimensions are not searchable" };
  }
  if (kind === "unknown") {
    return { ok: false, error: `unknown dimension kind ${dim.representation}` };
  }
  if (kind === "date") {
    const count = parseDateValue(text, dim.date_format!);
    if (count === null) {
      return { ok: false, error: `expected ${dim.date_format}` };
    }
    const boundError = checkBounds(dim, count);
    return boundError ? { ok: false, error: boundError } : { ok: true, value: count };
  }
  if (kind === "list") {
    if (!/^\d+$/.test(text)) return { ok: false, error: "expected a label index" };
    const index = Number(text);
    const labels = dim.enum_labels ?? [];
    if (index >= labels.length) {
      return { ok: false, error: `only ${labels.length} labels` };
    }
    return { ok: true, value: index };
  }
  if (kind === "integer") {
    if (!/^-?\d+$/.test(text)) return { ok: false, error: "expected an integer" };
    const numeric = Number(text);
    const boundError = checkBounds(dim, numeric);
    return boundError ? { ok: false, error: boundError } : { ok: true, value: numeric };
  }
  // decimal
  if (!/^-?\d+(\.\d+)?$/.test(text)) {
    return { ok: false, error: "expected a decimal number" };
  }
  const scale = effectiveScale(dim);
  const fraction = text.split(".")[1] ?? "";
  if (fraction.length > scale) {
    return { ok: false, error: `at most ${scale} decimal places` };
  }
  const boundError = checkBounds(dim, Number(text));
  // Decimals travel as strings so the service never sees a float.
  return boundError ? { ok: false, error: boundError } : { ok: true, value: text };
}

// ---------------------------------------------------------------------------
// Query assembly
// ---------------------------------------------------------------------------

/** Raw form inputs: per dimension index, the three constraint fields. */
export type FormInputs = Record<number, { sim?: string; min?: string; max?: string }>;

export interface BuiltQuery {
  ok: boolean;
  query?: QueryJson;
  errors: Record<number, string>;
}

export function buildQuery(
  model: FormModel,
  inputs: FormInputs,
  k: number,
  metric: "manhattan" | "euclidean",
  weights?: Record<number, number>,
): BuiltQuery {
  const errors: Record<number, string> = {};
  const constraints: Record<string, ConstraintJson> = {};
  for (const row of model.rows) {
    const input = inputs[row.dim.index];
    if (!input) continue;
    const filled = [input.sim, input.min, input.max].some(
      (raw) => raw !== undefined && raw.trim() !== "",
    );
    if (!filled) continue;
    if (!row.queryable) {
      errors[row.dim.index] = "text dimensions are not searchable";
      continue;
    }
    const constraint: ConstraintJson = {};
    for (const field of ["sim", "min", "max"] as const) {
      const raw = input[field];
      if (raw === undefined || raw.trim() === "") continue;
      const checked = validateField(row.dim, raw);
      if (!checked.ok) {
        errors[row.dim.index] = checked.error;
      } else if (checked.value !== null) {
        constraint[field] = checked.value;
      }
    }
    if (!(row.dim.index in errors)) {
      constraints[String(row.dim.index)] = constraint;
    }
  }
  if (Object.keys(errors).length > 0) {
    return { ok: false, errors };
  }
  if (Object.keys(constraints).length === 0) {
    return { ok: false, errors: { [-1]: "enter at least one sim / min / max value" } };
  }
  const query: QueryJson = { constraints, k, metric };
  if (weights && Object.keys(weights).length > 0) {
    query.weights = Object.fromEntries(
      Object.entries(weights).map(([j, w]) => [j, String(w)]),
    );
  }
  return { ok: true, query, errors: {} };
}
