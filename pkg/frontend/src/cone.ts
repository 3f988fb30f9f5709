/** Dog-leg cone arithmetic, a direct port of the engine's move geometry.
 * The contract tests replay engine-generated states through these functions
 * and require identical integer step intervals and lattice targets, so the
 * formulas below must stay term-for-term equal to the server side. */

import type { Constraints } from "./types.js";

/** Slack in lattice-step units when intersecting the cone with the lattice;
 * keeps exact-boundary steps stable under float round-off. */
export const CLASS_EPS = 1e-9;

const DEG_TO_RAD = Math.PI / 180;
const RAD_TO_DEG = 180 / Math.PI;

export interface ConeParams {
  standLength: number;
  spacing: number;
  limitDeg: number;
}

export function coneFromConstraints(c: Constraints): ConeParams {
  return {
    standLength: c.stand_length,
    spacing: c.y_grid_spacing,
    limitDeg: c.dogleg_limit_deg,
  };
}

/** Dip of a stand with vertical change dy, degrees from horizontal
 * (positive downward). */
export function dipDeg(dy: number, standLength: number): number {
  return Math.atan(dy / standLength) * RAD_TO_DEG;
}

/** Integer interval [lo, hi] of legal lattice steps for one stand. A step of
 * k lattice units changes y by k * spacing; it is legal when the resulting
 * dip differs from dip0Deg by at most limitDeg. */
export function stepClassInterval(
  dip0Deg: number,
  spacing: number,
  standLength: number,
  limitDeg: number,
): [number, number] {
  let loAng = (dip0Deg - limitDeg) * DEG_TO_RAD;
  let hiAng = (dip0Deg + limitDeg) * DEG_TO_RAD;
  loAng = Math.max(loAng, -Math.PI / 2 + 1e-6);
  hiAng = Math.min(hiAng, Math.PI / 2 - 1e-6);
  // + 0 turns ceil's negative zero into the plain integer zero
  const lo = Math.ceil((Math.tan(loAng) * standLength) / spacing - CLASS_EPS) + 0;
  const hi = Math.floor((Math.tan(hiAng) * standLength) / spacing + CLASS_EPS) + 0;
  return [lo, hi];
}

export function classDipDeg(k: number, spacing: number, standLength: number): number {
  return dipDeg(k * spacing, standLength);
}

export function isOnLattice(y: number, spacing: number, tol = 1e-6): boolean {
  const r = y / spacing;
  return Math.abs(r - Math.round(r)) <= tol;
}

export function snapDown(v: number, spacing: number): number {
  return Math.floor(v / spacing + CLASS_EPS) * spacing;
}

export function snapUp(v: number, spacing: number): number {
  return Math.ceil(v / spacing - CLASS_EPS) * spacing;
}

/** Every lattice depth reachable from (yCur, dip0Deg) in one stand, shallow
 * to deep; the continue targets of the engine's legal move set. */
export function legalTargets(yCur: number, dip0Deg: number, cone: ConeParams): number[] {
  const [lo, hi] = stepClassInterval(dip0Deg, cone.spacing, cone.standLength, cone.limitDeg);
  const targets: number[] = [];
  for (let k = lo; k <= hi; k++) targets.push(yCur + k * cone.spacing);
  return targets;
}

export interface ClampResult {
  y: number;
  /** True when the desired depth fell outside the dog-leg cone (a plain
   * lattice snap does not count). */
  clamped: boolean;
}

/** Nearest legal lattice target for a desired depth: snap to the lattice,
 * then clamp the step into the dog-leg interval. */
export function clampToCone(
  yCur: number,
  dip0Deg: number,
  desiredY: number,
  cone: ConeParams,
): ClampResult {
  const [lo, hi] = stepClassInterval(dip0Deg, cone.spacing, cone.standLength, cone.limitDeg);
  const want = Math.floor((desiredY - yCur) / cone.spacing + 0.5);
  const k = Math.min(Math.max(want, lo), hi);
  return { y: yCur + k * cone.spacing, clamped: k !== want };
}

export function clampTarget(
  yCur: number,
  dip0Deg: number,
  desiredY: number,
  cone: ConeParams,
): number {
  return clampToCone(yCur, dip0Deg, desiredY, cone).y;
}
