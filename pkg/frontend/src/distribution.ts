/** What-if score distribution display model: decile edges, P10..P90 bars
 * with the previous evaluation grayed behind them, and percentile-band
 * member selection.
 *
 * The band picker is a port of the server's selector and must agree with it
 * member-for-member, so the percentile interpolation reproduces the linear
 * method bit for bit (including its symmetric lerp branch). */

import type { ScoreEntry } from "./types.js";

export const PERCENTILE_LEVELS = [10, 20, 30, 40, 50, 60, 70, 80, 90] as const;

function lerp(a: number, b: number, t: number): number {
  const d = b - a;
  return t >= 0.5 ? b - d * (1 - t) : a + d * t;
}

/** Linear-interpolated percentile of an ascending array, q in [0, 100]. */
export function percentileLinear(sorted: number[], q: number): number {
  const n = sorted.length;
  if (n === 0) throw new RangeError("empty score distribution");
  const virtual = (q / 100) * (n - 1);
  const i = Math.floor(virtual);
  if (i >= n - 1) return sorted[n - 1];
  return lerp(sorted[i], sorted[i + 1], virtual - i);
}

function ascending(scores: number[]): number[] {
  return [...scores].sort((a, b) => a - b);
}

/** The 11 decile edges P0, P10, ..., P100. */
export function decileEdges(scores: number[]): number[] {
  const s = ascending(scores);
  const edges: number[] = [];
  for (let q = 0; q <= 100; q += 10) edges.push(percentileLinear(s, q));
  return edges;
}

/** Indices of the scores falling in decile band b (0..9). Band 0 is closed
 * on both sides, every later band excludes its lower edge, so the ten bands
 * partition the sample. */
export function selectBand(scores: number[], band: number): number[] {
  if (!Number.isInteger(band) || band < 0 || band > 9) {
    throw new RangeError("band must be in 0..9");
  }
  const edges = decileEdges(scores);
  const lo = edges[band];
  const hi = edges[band + 1];
  const out: number[] = [];
  for (let i = 0; i < scores.length; i++) {
    const s = scores[i];
    const inBand = band === 0 ? s >= lo && s <= hi : s > lo && s <= hi;
    if (inBand) out.push(i);
  }
  return out;
}

/** Realization ids of the evaluate-response entries in decile band b. */
export function selectBandMembers(entries: ScoreEntry[], band: number): number[] {
  const picked = selectBand(entries.map((e) => e.score), band);
  return picked.map((i) => entries[i].realization);
}

export interface BarModel {
  levels: readonly number[];
  /** P10..P90 of the latest evaluation. */
  current: number[];
  /** Same levels for the previous evaluation; null on the first one. */
  previous: number[] | null;
  /** All scores equal: the bars collapse to a single value. */
  degenerate: boolean;
  /** Empirical cumulative density of the latest evaluation. */
  cumulative: { score: number; p: number }[];
}

export function buildBars(current: ScoreEntry[], previous: ScoreEntry[] | null): BarModel {
  const scores = current.map((e) => e.score);
  const s = ascending(scores);
  const pct = (vals: number[]): number[] =>
    PERCENTILE_LEVELS.map((q) => percentileLinear(vals, q));
  return {
    levels: PERCENTILE_LEVELS,
    current: pct(s),
    previous: previous ? pct(ascending(previous.map((e) => e.score))) : null,
    degenerate: s[0] === s[s.length - 1],
    cumulative: s.map((score, i) => ({ score, p: (i + 1) / s.length })),
  };
}
