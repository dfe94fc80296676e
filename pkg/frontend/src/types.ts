/** Payload shapes served by the campaign HTTP API (GET /campaigns/{id}). */

export interface CampaignConfig {
  sigma_ult: number;
  censor_cycles: number;
  grid: number[];
  [key: string]: unknown;
}

export interface ResultRow {
  q: number;
  cycles: number;
  censored: boolean;
}

export interface Proposal {
  q: number;
  version: number;
  /** [stress level, objective value] per candidate grid point. */
  trace: [number, number][];
  objective_min: number;
}

export interface PosteriorSummary {
  /** parameter name -> [mean, lower 2.5%, upper 97.5%] */
  summary: Record<string, number[]>;
  version: number;
}

export interface ObjectivePoint {
  version: number;
  objective: number;
}

export interface CampaignView {
  id: string;
  version: number;
  config: CampaignConfig;
  priors: Record<string, number>;
  seed: number;
  results: ResultRow[];
  proposal: Proposal | null;
  posterior: PosteriorSummary | null;
  objective_history: ObjectivePoint[];
}

export type SortKey = "round" | "q" | "cycles" | "censored";

export interface OutcomeForm {
  q: string;
  cycles: string;
  censored: boolean;
}

export type Banner =
  | { kind: "none" }
  | { kind: "error"; message: string }
  | { kind: "conflict"; currentVersion: number };

export interface AppState {
  view: CampaignView | null;
  banner: Banner;
  sortKey: SortKey;
  sortAsc: boolean;
  form: OutcomeForm;
  busy: boolean;
}
