/** Overprint raster harness: crisp edges when the ensemble has no spread,
 * and a falling pixel-variance metric when a real update contracts it. */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { depthRange, meanPixelVariance, rasterizeSand, Viewport } from "../src/overprint.js";
import type { RealizationsPayload } from "../src/types.js";

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/overprint_payloads.json", import.meta.url), "utf-8"),
) as { prior: RealizationsPayload; posterior: RealizationsPayload; observed_x: [number, number] };

function constantPayload(members: number, depths: [number, number, number, number]): RealizationsPayload {
  const x = [0, 60, 120, 180];
  return {
    generation: 0,
    x,
    realizations: Array.from({ length: members }, () => ({
      boundaries: depths.map((d) => x.map(() => d)),
    })),
  };
}

describe("zero-spread ensembles", () => {
  it("render crisp edges: every pixel is fully covered or empty", () => {
    const payload = constantPayload(24, [10, 13, 20, 23]);
    const vp: Viewport = { x0: 0, x1: 180, y0: 5, y1: 28 };
    const raster = rasterizeSand(payload, vp, 90, 92);
    for (const c of raster.data) expect(c === 0 || c === 1).toBe(true);
    expect(meanPixelVariance(raster)).toBe(0);
    // both sand bodies actually show up
    const covered = raster.data.reduce((acc, c) => acc + c, 0);
    expect(covered).toBeGreaterThan(0);
  });

  it("covers the sand interval and not the shale around it", () => {
    const payload = constantPayload(4, [10, 13, 20, 23]);
    const vp: Viewport = { x0: 0, x1: 180, y0: 0, y1: 30 };
    const raster = rasterizeSand(payload, vp, 10, 300);
    const coverageAt = (y: number) => {
      const py = Math.floor(((y - vp.y0) / (vp.y1 - vp.y0)) * 300);
      return raster.data[py * 10 + 5];
    };
    expect(coverageAt(11.5)).toBe(1); // inside the top sand
    expect(coverageAt(21.5)).toBe(1); // inside the bottom sand
    expect(coverageAt(5.0)).toBe(0); // shale above
    expect(coverageAt(16.5)).toBe(0); // shale between the sands
    expect(coverageAt(28.0)).toBe(0); // shale below
  });
});

describe("ensemble contraction", () => {
  it("a posterior payload lowers the pixel variance over the drilled stand", () => {
    const { prior, posterior, observed_x } = fixture;
    const [yLo, yHi] = depthRange(prior);
    const vp: Viewport = {
      x0: prior.x[0],
      x1: prior.x[prior.x.length - 1],
      y0: yLo,
      y1: yHi,
    };
    const before = rasterizeSand(prior, vp, 120, 160);
    const after = rasterizeSand(posterior, vp, 120, 160);
    const vBefore = meanPixelVariance(before, observed_x);
    const vAfter = meanPixelVariance(after, observed_x);
    expect(vBefore).toBeGreaterThan(0);
    expect(vAfter).toBeLessThan(vBefore);
  });

  it("generations advance across the fixture payloads", () => {
    expect(fixture.prior.generation).toBe(0);
    expect(fixture.posterior.generation).toBe(1);
    expect(fixture.posterior.realizations).toHaveLength(fixture.prior.realizations.length);
  });
});

describe("raster bounds", () => {
  it("rejects empty rasters and x windows off the viewport", () => {
    const payload = constantPayload(2, [10, 13, 20, 23]);
    const vp: Viewport = { x0: 0, x1: 180, y0: 5, y1: 28 };
    expect(() => rasterizeSand(payload, vp, 0, 10)).toThrow(RangeError);
    const raster = rasterizeSand(payload, vp, 10, 10);
    expect(() => meanPixelVariance(raster, [500, 600])).toThrow(RangeError);
  });
});
