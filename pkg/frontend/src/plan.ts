/** Editable plan-ahead trajectory. The drilled prefix is immutable; every
 * point beyond the bit can be dragged up or down and is clamped into the
 * dog-leg cone of its predecessor, with the adjustment propagated forward
 * so the whole plan always stays drillable. */

import { clampToCone, ConeParams, coneFromConstraints, dipDeg } from "./cone.js";
import type { Point, SessionOpenResponse } from "./types.js";

export interface MoveResult {
  /** Depth actually stored after lattice snap and cone clamp. */
  y: number;
  /** True when the request exceeded the cone somewhere (cue the user). */
  clamped: boolean;
}

export class PlanEditor {
  readonly abscissas: number[];
  private readonly cone: ConeParams;
  private readonly points: number[];
  private drilledCount: number;
  private bitDipDeg: number;
  private selectedIndex: number | null = null;

  constructor(abscissas: number[], cone: ConeParams, startY: number, initialDipDeg: number) {
    if (abscissas.length < 2) throw new RangeError("need at least one stand to plan");
    this.abscissas = [...abscissas];
    this.cone = cone;
    this.points = new Array(abscissas.length).fill(startY);
    this.drilledCount = 1;
    this.bitDipDeg = initialDipDeg;
    this.reclampFrom(1);
  }

  static fromSession(open: SessionOpenResponse): PlanEditor {
    return new PlanEditor(
      open.abscissas,
      coneFromConstraints(open.constraints),
      open.state.y,
      open.state.dip_deg,
    );
  }

  /** Incoming dip at point i: the bit's dip at the anchor, the dip of the
   * approaching segment further out. */
  private dipInto(i: number): number {
    if (i <= this.drilledCount) return this.bitDipDeg;
    return dipDeg(this.points[i - 1] - this.points[i - 2], this.cone.standLength);
  }

  /** Re-clamp plan points from index `start` on, treating current values as
   * the desired depths. Never touches the drilled prefix. */
  private reclampFrom(start: number): boolean {
    let clamped = false;
    for (let i = Math.max(start, this.drilledCount); i < this.points.length; i++) {
      const res = clampToCone(this.points[i - 1], this.dipInto(i), this.points[i], this.cone);
      clamped = clamped || res.clamped;
      this.points[i] = res.y;
    }
    return clamped;
  }

  get drilled(): Point[] {
    return this.points.slice(0, this.drilledCount).map((y, i) => ({ x: this.abscissas[i], y }));
  }

  get plan(): Point[] {
    return this.points.slice(this.drilledCount).map((y, i) => ({
      x: this.abscissas[this.drilledCount + i],
      y,
    }));
  }

  /** Full trajectory from the start, the shape /evaluate expects. */
  get trajectory(): Point[] {
    return this.points.map((y, i) => ({ x: this.abscissas[i], y }));
  }

  /** The depth the next continue commit will target. */
  get nextTarget(): number {
    if (this.finishedPlanning) throw new RangeError("no stands left to drill");
    return this.points[this.drilledCount];
  }

  get finishedPlanning(): boolean {
    return this.drilledCount >= this.points.length;
  }

  get committedCount(): number {
    return this.drilledCount;
  }

  get bitDip(): number {
    return this.bitDipDeg;
  }

  canSelect(i: number): boolean {
    return Number.isInteger(i) && i >= this.drilledCount && i < this.points.length;
  }

  /** Select a plan point for editing; drilled points are refused. */
  select(i: number): boolean {
    if (!this.canSelect(i)) return false;
    this.selectedIndex = i;
    return true;
  }

  deselect(): void {
    this.selectedIndex = null;
  }

  get selected(): number | null {
    return this.selectedIndex;
  }

  /** Drag point i to a desired depth. The depth snaps to the lattice, clamps
   * into the cone, and the change propagates through the rest of the plan. */
  moveTo(i: number, desiredY: number): MoveResult {
    if (!this.canSelect(i)) throw new RangeError(`point ${i} is drilled or out of range`);
    if (!Number.isFinite(desiredY)) throw new RangeError("desired depth must be finite");
    const res = clampToCone(this.points[i - 1], this.dipInto(i), desiredY, this.cone);
    this.points[i] = res.y;
    const clampedAhead = this.reclampFrom(i + 1);
    return { y: res.y, clamped: res.clamped || clampedAhead };
  }

  moveSelected(desiredY: number): MoveResult | null {
    if (this.selectedIndex === null) return null;
    return this.moveTo(this.selectedIndex, desiredY);
  }

  /** Extend the drilled path after a server-confirmed commit and re-clamp
   * what remains of the plan against the new bit dip. */
  advance(committedY: number, newDipDeg: number): void {
    if (this.finishedPlanning) throw new RangeError("no stands left to drill");
    this.points[this.drilledCount] = committedY;
    this.drilledCount += 1;
    this.bitDipDeg = newDipDeg;
    if (this.selectedIndex !== null && this.selectedIndex < this.drilledCount) {
      this.selectedIndex = null;
    }
    this.reclampFrom(this.drilledCount);
  }

  snapshot(): number[] {
    return [...this.points];
  }

  restore(points: number[]): void {
    if (points.length !== this.points.length) throw new RangeError("snapshot shape mismatch");
    for (let i = this.drilledCount; i < this.points.length; i++) this.points[i] = points[i];
  }
}
