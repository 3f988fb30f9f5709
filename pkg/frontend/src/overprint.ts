/** Ensemble overprint raster: the fraction of members whose sand bodies
 * cover each pixel. The canvas paints it as translucent layers; the tests
 * use it as a harness, checking that a tighter posterior ensemble lowers
 * the per-pixel coverage variance over the observed interval. */

import type { RealizationsPayload } from "./types.js";

export interface Viewport {
  x0: number;
  x1: number;
  /** Depth range, y0 shallow (top of screen) to y1 deep. */
  y0: number;
  y1: number;
}

export interface Raster {
  width: number;
  height: number;
  /** Row-major coverage fractions in [0, 1]. */
  data: Float64Array;
  viewport: Viewport;
}

/** Linear interpolation of one boundary row at lateral position x. The grid
 * is uniform and the viewport stays inside it; edges clamp. */
function boundaryAt(xs: number[], row: number[], x: number): number {
  const n = xs.length;
  if (x <= xs[0]) return row[0];
  if (x >= xs[n - 1]) return row[n - 1];
  const dx = xs[1] - xs[0];
  let i = Math.floor((x - xs[0]) / dx);
  if (i >= n - 1) i = n - 2;
  const t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return row[i] + t * (row[i + 1] - row[i]);
}

export function rasterizeSand(
  payload: RealizationsPayload,
  viewport: Viewport,
  width: number,
  height: number,
): Raster {
  if (width < 1 || height < 1) throw new RangeError("raster needs at least one pixel");
  const data = new Float64Array(width * height);
  const members = payload.realizations;
  for (const member of members) {
    const [b1, b2, b3, b4] = member.boundaries;
    for (let px = 0; px < width; px++) {
      const x = viewport.x0 + ((px + 0.5) / width) * (viewport.x1 - viewport.x0);
      const roofTop = boundaryAt(payload.x, b1, x);
      const baseTop = boundaryAt(payload.x, b2, x);
      const roofBot = boundaryAt(payload.x, b3, x);
      const baseBot = boundaryAt(payload.x, b4, x);
      for (let py = 0; py < height; py++) {
        const y = viewport.y0 + ((py + 0.5) / height) * (viewport.y1 - viewport.y0);
        if ((y >= roofTop && y < baseTop) || (y >= roofBot && y < baseBot)) {
          data[py * width + px] += 1;
        }
      }
    }
  }
  // divide the member counts once at the end, so full agreement is exactly 1
  for (let i = 0; i < data.length; i++) data[i] /= members.length;
  return { width, height, data, viewport };
}

/** Mean of the per-pixel coverage variance c * (1 - c), optionally over a
 * lateral sub-interval. Zero exactly when every member agrees at every
 * pixel (crisp edges); drops as the ensemble contracts. */
export function meanPixelVariance(raster: Raster, xRange?: [number, number]): number {
  const { width, height, data, viewport } = raster;
  let pxLo = 0;
  let pxHi = width;
  if (xRange) {
    const toPx = (x: number) => ((x - viewport.x0) / (viewport.x1 - viewport.x0)) * width;
    pxLo = Math.max(0, Math.floor(toPx(xRange[0])));
    pxHi = Math.min(width, Math.ceil(toPx(xRange[1])));
    if (pxHi <= pxLo) throw new RangeError("x range misses the raster");
  }
  let total = 0;
  let count = 0;
  for (let py = 0; py < height; py++) {
    for (let px = pxLo; px < pxHi; px++) {
      const c = data[py * width + px];
      total += c * (1 - c);
      count++;
    }
  }
  return total / count;
}

/** Depth range covering every boundary in the payload, padded; a convenient
 * default viewport for the canvas. */
export function depthRange(payload: RealizationsPayload, pad = 2.0): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const member of payload.realizations) {
    for (const row of member.boundaries) {
      for (const v of row) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
  }
  return [lo - pad, hi + pad];
}
