/** Wire types for the benchmark server's JSON API. Field names mirror the
 * server payloads exactly; nothing here is recomputed client-side. */

export interface RoundInfo {
  round_id: string;
  cfg_digest: string;
  prior_seed: number;
  max_decisions: number;
}

export interface RoundsResponse {
  rounds: RoundInfo[];
}

export interface RealizationEntry {
  /** Four boundary depth rows (top sand roof/base, bottom sand roof/base),
   * one value per lateral grid node. */
  boundaries: number[][];
}

export interface RealizationsPayload {
  generation: number;
  x: number[];
  realizations: RealizationEntry[];
}

export interface ScoringLimits {
  cost_per_meter: number;
  sweet_spot_top: number;
  sweet_spot_bottom: number;
  sweet_multiplier: number;
}

export interface Constraints {
  stand_length: number;
  dogleg_limit_deg: number;
  y_grid_spacing: number;
  max_decisions: number;
  start: number[];
  initial_dip_deg: number;
  scoring: ScoringLimits;
  lattice: { y_min: number; y_max: number };
}

export interface StateBlock {
  x: number;
  y: number;
  dip_deg: number;
  decisions_taken: number;
  decisions_remaining: number;
}

export interface SessionOpenResponse {
  session_id: string;
  round_id: string;
  participant_id: string;
  cfg_digest: string;
  abscissas: number[];
  constraints: Constraints;
  realizations: RealizationsPayload;
  state: StateBlock;
}

export interface ScoreEntry {
  score: number;
  realization: number;
}

export interface EvaluateResponse {
  generation: number;
  scores: ScoreEntry[];
}

export interface CommitProgress {
  finished: false;
  realizations: RealizationsPayload;
  generation: number;
  state: StateBlock;
}

export interface CommitFinal {
  finished: true;
  score: number;
  percent: number | null;
  rank: number;
  finishers: number;
  stopped_early: boolean;
}

export type CommitResponse = CommitProgress | CommitFinal;

export interface ScoreboardRow {
  participant_id: string;
  score: number;
  percent: number | null;
  finished_at: string;
}

export interface ScoreboardResponse {
  round_id: string;
  scoreboard: ScoreboardRow[];
}

export interface Point {
  x: number;
  y: number;
}
