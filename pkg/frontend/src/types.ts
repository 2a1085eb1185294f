// Wire types of the REST service this client consumes.

export type Representation =
  | "list"
  | "text"
  | "integer"
  | "money"
  | "float_medium"
  | "float_max";

export interface FlatDimension {
  index: number;
  path: number[];
  gid: string;
  keyword: string;
  representation: Representation;
  weight: string;
  required: boolean;
  unit?: string;
  comment?: string;
  min?: number | string;
  max?: number | string;
  date_format?: string;
  scale?: number;
  enum_labels?: Record<string, string>[];
}

export interface SpaceSummary {
  index: number | null;
  ul: string;
  name: Record<string, string>;
  versions: number;
  dims: number;
  dvs: number;
  hash: string;
}

export interface SpaceDetail {
  ul: string;
  version: number;
  name: Record<string, string>;
  components: unknown[];
  flattened: FlatDimension[];
  hash: string;
  dvs: number;
  information_bits: number | null;
}

export interface ConstraintJson {
  sim?: number | string;
  min?: number | string;
  max?: number | string;
}

export interface QueryJson {
  constraints: Record<string, ConstraintJson>;
  k: number;
  metric: "manhattan" | "euclidean";
  weights?: Record<string, string>;
}

export interface HitJson {
  record_id: number;
  distance: number;
  values: (number | string | null)[];
}

export interface SearchResponse {
  hits: HitJson[];
  total: number;
}

export interface DimStatsJson {
  count: number;
  mean: string | null;
  std: string | null;
}

export interface StatsResponse {
  n: number;
  dims: Record<string, DimStatsJson>;
}

export interface IntervalJson {
  center: number;
  spread: number;
  factor: number;
  lower: number;
  upper: number;
  exact: boolean;
}

export interface SuggestIntervalsResponse {
  group_size: number;
  intervals: Record<string, IntervalJson>;
  weights: Record<string, number>;
}

export interface EvaluateVariantsResponse {
  variants: StatsResponse[];
}
