// Wire types mirroring the policyscape service JSON.

export type OutcomeName = "cumulative_infections" | "svi_variance";

export interface PolicyInfo {
  name: string;
  description: string;
  low: number;
  high: number;
  integer: boolean;
  baseline: number;
  range_label: string;
}

export interface PoliciesResponse {
  policies: PolicyInfo[];
}

export interface Prediction {
  mean: number;
  sd: number;
  lo90: number;
  hi90: number;
}

export interface PredictResponse {
  policy: Record<string, number>;
  normalized: number[];
  predictions: Record<string, Prediction>;
}

export interface SviBinStat {
  bin: string;
  mean: number;
  sd: number;
}

export interface BaselineResponse {
  n_agents: number;
  replicates: number;
  attack_rate_mean: number;
  attack_rate_sd: number;
  svi_variance_mean: number;
  svi_variance_sd: number;
  attack_rate_by_svi: SviBinStat[];
}

export interface Winner {
  row_id: number;
  intensity_norm: number;
  policy: Record<string, number>;
  normalized: number[];
  predictions: Record<string, Prediction>;
}

export interface SearchResponse {
  fraction_meeting_goal: number;
  n_candidates: number;
  winners: Winner[];
  warning: string | null;
}

export interface SearchRequest {
  goal_attack_rate: number;
  outcome?: OutcomeName;
  constraints?: Record<string, number>;
  k?: number;
  n_samples?: number;
  count?: number;
  seed?: number;
  strict?: boolean;
}
