/** The editor's cone arithmetic must agree with the engine. The fixture file
 * holds engine-generated states (legal move sets and dog-leg intervals) plus
 * clamp oracles; the port has to reproduce every number exactly. */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  clampTarget,
  ConeParams,
  dipDeg,
  isOnLattice,
  legalTargets,
  snapDown,
  snapUp,
  stepClassInterval,
} from "../src/cone.js";

interface ClampCase {
  desired: number;
  clamped: number;
}

interface StateCase {
  y: number;
  dip_deg: number;
  lo: number;
  hi: number;
  targets: number[];
  clamps: ClampCase[];
}

interface IntervalCase {
  dip0_deg: number;
  spacing: number;
  stand_length: number;
  limit_deg: number;
  lo: number;
  hi: number;
}

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/cone_cases.json", import.meta.url), "utf-8"),
) as {
  constraints: { stand_length: number; dogleg_limit_deg: number; y_grid_spacing: number };
  states: StateCase[];
  intervals: IntervalCase[];
};

const cone: ConeParams = {
  standLength: fixture.constraints.stand_length,
  spacing: fixture.constraints.y_grid_spacing,
  limitDeg: fixture.constraints.dogleg_limit_deg,
};

describe("dog-leg cone parity with the engine", () => {
  it("reproduces every legal move set bit for bit", () => {
    expect(fixture.states.length).toBeGreaterThanOrEqual(8);
    for (const s of fixture.states) {
      expect(legalTargets(s.y, s.dip_deg, cone)).toEqual(s.targets);
    }
  });

  it("reproduces the engine's step intervals on walked states", () => {
    for (const s of fixture.states) {
      const [lo, hi] = stepClassInterval(s.dip_deg, cone.spacing, cone.standLength, cone.limitDeg);
      expect([lo, hi]).toEqual([s.lo, s.hi]);
    }
  });

  it("reproduces step intervals across spacings, stands, and limits", () => {
    for (const c of fixture.intervals) {
      const [lo, hi] = stepClassInterval(c.dip0_deg, c.spacing, c.stand_length, c.limit_deg);
      expect([lo, hi]).toEqual([c.lo, c.hi]);
    }
  });

  it("clamps desired depths onto the engine's move set", () => {
    for (const s of fixture.states) {
      for (const c of s.clamps) {
        const got = clampTarget(s.y, s.dip_deg, c.desired, cone);
        expect(got).toBe(c.clamped);
        expect(s.targets).toContain(got);
      }
    }
  });

  it("clamps far-out requests to the cone edge targets", () => {
    for (const s of fixture.states) {
      const deepest = s.targets[s.targets.length - 1];
      const shallowest = s.targets[0];
      expect(clampTarget(s.y, s.dip_deg, s.y + 1e6, cone)).toBe(deepest);
      expect(clampTarget(s.y, s.dip_deg, s.y - 1e6, cone)).toBe(shallowest);
    }
  });

  it("keeps already-legal targets unchanged", () => {
    for (const s of fixture.states) {
      for (const t of s.targets) {
        expect(clampTarget(s.y, s.dip_deg, t, cone)).toBe(t);
      }
    }
  });
});

describe("lattice helpers", () => {
  it("computes dip angles from vertical change", () => {
    expect(dipDeg(0, 30)).toBe(0);
    expect(dipDeg(30, 30)).toBeCloseTo(45, 12);
    expect(dipDeg(-30, 30)).toBeCloseTo(-45, 12);
  });

  it("snaps onto lattice multiples", () => {
    expect(snapDown(1.26, 0.25)).toBeCloseTo(1.25, 12);
    expect(snapUp(1.26, 0.25)).toBeCloseTo(1.5, 12);
    expect(snapDown(1.25, 0.25)).toBeCloseTo(1.25, 12);
    expect(snapUp(1.25, 0.25)).toBeCloseTo(1.25, 12);
    expect(isOnLattice(1.25, 0.25)).toBe(true);
    expect(isOnLattice(1.3, 0.25)).toBe(false);
  });

  it("widens the move set as the dip flattens the cone edge", () => {
    // at 0 dip the 2 degree cone over a 30 m stand holds just over 1 m
    const targets = legalTargets(4.5, 0, cone);
    expect(targets[0]).toBeCloseTo(4.5 - 1.0, 12);
    expect(targets[targets.length - 1]).toBeCloseTo(4.5 + 1.0, 12);
    expect(targets).toHaveLength(9);
  });
});
