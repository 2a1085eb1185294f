import type { FlatDimension, HitJson, SpaceDetail } from "../src/types";

function dim(partial: Partial<FlatDimension> & { index: number; keyword: string }): FlatDimension {
  return {
    path: [partial.index],
    gid: `${partial.index}@http://e.org/kinds`,
    representation: "integer",
    weight: "1",
    required: false,
    ...partial,
  };
}

/** One dimension of every kind the definition schema can declare. */
export const ALL_KINDS_SPACE: SpaceDetail = {
  ul: "http://e.org/kinds",
  version: 1,
  name: { en: "all kinds" },
  components: [],
  hash: "ab".repeat(32),
  dvs: 42,
  information_bits: null,
  flattened: [
    dim({ index: 0, keyword: "count", representation: "integer", min: 0, max: 10 }),
    dim({
      index: 1,
      keyword: "kind",
      representation: "list",
      enum_labels: [{ en: "a" }, { en: "b" }, { en: "c" }],
    }),
    dim({ index: 2, keyword: "price", representation: "money", unit: "Euro", min: "0.00" }),
    dim({ index: 3, keyword: "ratio", representation: "float_medium", scale: 3 }),
    dim({ index: 4, keyword: "mass", representation: "float_max", unit: "kg" }),
    dim({ index: 5, keyword: "note", representation: "text" }),
    dim({ index: 6, keyword: "when", representation: "integer", date_format: "yyyy-mm-dd" }),
    dim({
      index: 7,
      keyword: "length_m",
      representation: "integer",
      path: [7, 0],
      gid: "0@http://e.org/len",
      weight: "2",
    }),
  ],
};

export const TWO_DIM_SPACE: SpaceDetail = {
  ul: "http://e.org/test-space",
  version: 1,
  name: { en: "test-space" },
  components: [],
  hash: "cd".repeat(32),
  dvs: 10001,
  information_bits: 6.918,
  flattened: [
    dim({ index: 0, keyword: "dim0", min: 0, max: 10 }),
    dim({ index: 1, keyword: "dim1", min: 0, max: 10 }),
  ],
};

/** A recorded hit list for the sim=(4,7) Euclidean query. */
export const RECORDED_HITS: HitJson[] = [
  { record_id: 3, distance: 0.0, values: [4, 7] },
  { record_id: 17, distance: 1.0, values: [4, 8] },
  { record_id: 29, distance: 1.0, values: [5, 7] },
  { record_id: 41, distance: 1.4142135623730951, values: [3, 6] },
  { record_id: 58, distance: 2.0, values: [4, 5] },
  { record_id: 63, distance: 2.23606797749979, values: [6, 8] },
];

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
