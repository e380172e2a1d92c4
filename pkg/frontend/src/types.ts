/** JSON payload shapes served by the session API. */

export type Label = 1 | -1;

export interface QueryPayload {
  index: number;
  score: number;
  features: Record<string, number>;
  member_scores: number[];
  relevance: number[];
}

export interface TraceRow {
  iteration: number;
  queried_index: number;
  label: Label;
  cumulative_anomalies: number;
  loss: number;
}

export interface RankRow {
  rank: number;
  index: number;
  score: number;
  labeled: boolean;
  label: Label | null;
}

export interface GridPayload {
  resolution: number;
  xs: number[];
  ys: number[];
  /** score[i][j] evaluated at (xs[j], ys[i]) */
  score: number[][];
  /** relevance[m][i][j] for ensemble member m */
  relevance: number[][][];
}

export interface DatasetInfo {
  name: string;
  n: number;
  d: number;
  feature_names: string[];
  /** raw coordinates for 2-D datasets, null otherwise */
  points: number[][] | null;
}

export interface CreateResponse {
  session_id: string;
  t: number;
  budget: number;
  anomalies_found: number;
  done: boolean;
  query: QueryPayload | null;
}

export interface LabelResponse {
  t: number;
  budget: number;
  anomalies_found: number;
  done: boolean;
  loss: number;
  next_query: QueryPayload | null;
  /** present only on the final response */
  trace?: TraceRow[];
}

export interface StatePayload {
  session_id: string;
  t: number;
  budget: number;
  anomalies_found: number;
  done: boolean;
  pending: QueryPayload | null;
  loss_history: number[];
  trace: TraceRow[];
  top: RankRow[];
  dataset: DatasetInfo;
  grid: GridPayload | null;
}

export interface ExplainPayload {
  index: number;
  member: number;
  relevance: number[];
  member_scores: number[];
  score: number;
  rules: string[];
  terms: [string, number][];
  intercept: number;
}

export interface DatasetListing {
  id: string;
  name: string;
  n: number;
  d: number;
  anomalies: number;
}

export interface SessionConfig {
  n_members?: number;
  budget?: number;
  seed?: number;
  tau?: number;
  bias?: number;
  lambda?: number;
  standardize?: boolean;
}
