/** Canvas application: uncertainty overprint, trajectory editing, what-if
 * bars, commit controls. All numbers shown come from server responses; this
 * layer only draws them. */

import { ApiClient } from "./client.js";
import { SessionController, finalPanelText } from "./controller.js";
import { depthRange } from "./overprint.js";
import type { Point, RealizationsPayload } from "./types.js";

/** Vertical sensing radius of the look-around tool, metres; sets the height
 * of the decision ellipses. */
const LOOK_AROUND_M = 4.8;

interface Frame {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  width: number;
  height: number;
}

function xToPx(f: Frame, x: number): number {
  return ((x - f.x0) / (f.x1 - f.x0)) * f.width;
}

function yToPx(f: Frame, y: number): number {
  return ((y - f.y0) / (f.y1 - f.y0)) * f.height;
}

function pxToY(f: Frame, px: number): number {
  return f.y0 + (px / f.height) * (f.y1 - f.y0);
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setupCanvas(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const dpr = window.devicePixelRatio || 1;
  const rect = canvas.getBoundingClientRect();
  canvas.width = Math.max(1, Math.round(rect.width * dpr));
  canvas.height = Math.max(1, Math.round(rect.height * dpr));
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  ctx.scale(dpr, dpr);
  return ctx;
}

function drawOverprint(
  ctx: CanvasRenderingContext2D,
  frame: Frame,
  payload: RealizationsPayload,
  highlighted: number[] | null,
): void {
  const picked = highlighted === null ? null : new Set(highlighted);
  const base = Math.min(0.12, 3 / payload.realizations.length);
  for (let m = 0; m < payload.realizations.length; m++) {
    const dimmed = picked !== null && !picked.has(m);
    ctx.globalAlpha = dimmed ? base * 0.25 : picked ? 0.3 : base;
    ctx.fillStyle = dimmed ? "#b0a27a" : "#d9a441";
    const [b1, b2, b3, b4] = payload.realizations[m].boundaries;
    for (const [roof, bottom] of [
      [b1, b2],
      [b3, b4],
    ]) {
      ctx.beginPath();
      payload.x.forEach((x, i) => {
        const px = xToPx(frame, x);
        const py = yToPx(frame, roof[i]);
        if (i === 0) ctx.moveTo(px, py);
        else ctx.lineTo(px, py);
      });
      for (let i = payload.x.length - 1; i >= 0; i--) {
        ctx.lineTo(xToPx(frame, payload.x[i]), yToPx(frame, bottom[i]));
      }
      ctx.closePath();
      ctx.fill();
    }
  }
  ctx.globalAlpha = 1;
}

function drawPath(
  ctx: CanvasRenderingContext2D,
  frame: Frame,
  points: Point[],
  color: string,
  width: number,
  dashed = false,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.beginPath();
  points.forEach((p, i) => {
    const px = xToPx(frame, p.x);
    const py = yToPx(frame, p.y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function main(): void {
  const client = new ApiClient("");
  const controller = new SessionController(client);

  const viewCanvas = el<HTMLCanvasElement>("view");
  const barsCanvas = el<HTMLCanvasElement>("bars");
  const roundSelect = el<HTMLSelectElement>("round-select");
  const participant = el<HTMLInputElement>("participant-input");
  const joinBtn = el<HTMLButtonElement>("join-btn");
  const evaluateBtn = el<HTMLButtonElement>("evaluate-btn");
  const commitBtn = el<HTMLButtonElement>("commit-btn");
  const stopBtn = el<HTMLButtonElement>("stop-btn");
  const upBtn = el<HTMLButtonElement>("up-btn");
  const downBtn = el<HTMLButtonElement>("down-btn");
  const clearBandBtn = el<HTMLButtonElement>("clear-band-btn");
  const statusLine = el<HTMLDivElement>("status");
  const banner = el<HTMLDivElement>("banner");
  const finalPanel = el<HTMLDivElement>("final-panel");

  let frame: Frame | null = null;

  function currentFrame(): Frame | null {
    const payload = controller.realizations;
    const info = controller.sessionInfo;
    if (!payload || !info) return null;
    const rect = viewCanvas.getBoundingClientRect();
    const [yLo, yHi] = depthRange(payload);
    return {
      x0: info.abscissas[0],
      x1: info.abscissas[info.abscissas.length - 1],
      y0: yLo,
      y1: yHi,
      width: rect.width,
      height: rect.height,
    };
  }

  function render(): void {
    const busy = controller.phase === "busy";
    const live = controller.phase === "ready";
    joinBtn.disabled = controller.phase !== "idle" || busy;
    evaluateBtn.disabled = !live;
    commitBtn.disabled = !live;
    stopBtn.disabled = !live;
    upBtn.disabled = !live;
    downBtn.disabled = !live;

    banner.textContent = controller.banner ?? "";
    banner.style.display = controller.banner ? "block" : "none";

    if (controller.finalPanel) {
      finalPanel.textContent = finalPanelText(controller.finalPanel);
      finalPanel.style.display = "block";
    } else {
      finalPanel.style.display = "none";
    }

    const state = controller.state;
    statusLine.textContent = state
      ? `x ${state.x} m | depth ${state.y} m | dip ${state.dip_deg.toFixed(3)} deg | ` +
        `${state.decisions_remaining} stands left | ensemble gen ${
          controller.realizations?.generation ?? "-"
        }`
      : "no session";

    drawView();
    drawBars();
  }

  function drawView(): void {
    const ctx = setupCanvas(viewCanvas);
    const rect = viewCanvas.getBoundingClientRect();
    ctx.clearRect(0, 0, rect.width, rect.height);
    const payload = controller.realizations;
    frame = currentFrame();
    if (!payload || !frame) return;

    drawOverprint(ctx, frame, payload, controller.highlightedMembers());

    const editor = controller.editor;
    const drilled = editor.drilled;
    const plan = editor.plan;

    // blue plan ahead, red next-commit segment, orange drilled path
    if (plan.length > 0) {
      const bit = drilled[drilled.length - 1];
      drawPath(ctx, frame, [bit, ...plan], "#1f6fd0", 1.5, true);
      drawPath(ctx, frame, [bit, plan[0]], "#d0342c", 2.5);
    }
    drawPath(ctx, frame, drilled, "#e8590c", 3);

    // decision ellipses sized to the tool's look-around
    const ry = Math.abs(yToPx(frame, LOOK_AROUND_M) - yToPx(frame, 0));
    plan.forEach((p, i) => {
      const idx = editor.committedCount + i;
      ctx.beginPath();
      ctx.ellipse(xToPx(frame!, p.x), yToPx(frame!, p.y), 9, ry, 0, 0, 2 * Math.PI);
      ctx.strokeStyle = idx === editor.selected ? "#d0342c" : "rgba(31,111,208,0.6)";
      ctx.lineWidth = idx === editor.selected ? 2 : 1;
      ctx.stroke();
    });
  }

  function drawBars(): void {
    const ctx = setupCanvas(barsCanvas);
    const rect = barsCanvas.getBoundingClientRect();
    ctx.clearRect(0, 0, rect.width, rect.height);
    const model = controller.bars();
    if (!model) return;

    const all = [...model.current, ...(model.previous ?? [])];
    const lo = Math.min(...all);
    const hi = Math.max(...all);
    const span = hi > lo ? hi - lo : 1;
    const n = model.levels.length;
    const bw = rect.width / n;
    const scale = (v: number) => ((v - lo) / span) * (rect.height - 14);

    if (model.previous) {
      ctx.fillStyle = "#b5b5b5";
      model.previous.forEach((v, i) => {
        const h = Math.max(2, scale(v));
        ctx.fillRect(i * bw + 2, rect.height - h, bw - 4, h);
      });
    }
    ctx.fillStyle = "#2b8a3e";
    model.current.forEach((v, i) => {
      const h = Math.max(2, scale(v));
      const selected = controller.selectedBand !== null && i + 1 === controller.selectedBand;
      ctx.globalAlpha = model.previous ? 0.85 : 1;
      ctx.fillStyle = selected ? "#d0342c" : "#2b8a3e";
      ctx.fillRect(i * bw + 6, rect.height - h, bw - 12, h);
      ctx.globalAlpha = 1;
    });
    ctx.fillStyle = "#333";
    ctx.font = "10px sans-serif";
    model.levels.forEach((q, i) => {
      ctx.fillText(`P${q}`, i * bw + 6, 10);
    });
  }

  async function run(task: () => Promise<unknown>): Promise<void> {
    controller.clearBanner();
    render();
    try {
      await task();
    } catch {
      // controller already recorded the failure in its banner
    }
    render();
  }

  joinBtn.addEventListener("click", () =>
    run(async () => {
      const name = participant.value.trim() || "anonymous";
      await controller.open(roundSelect.value, name);
    }),
  );
  evaluateBtn.addEventListener("click", () => run(() => controller.evaluatePlan()));
  commitBtn.addEventListener("click", () => run(() => controller.commitNext()));
  stopBtn.addEventListener("click", () => run(() => controller.stop()));
  clearBandBtn.addEventListener("click", () => {
    controller.selectBand(null);
    render();
  });

  function nudgeSelected(steps: number): void {
    if (controller.phase !== "ready") return;
    const editor = controller.editor;
    const idx = editor.selected ?? editor.committedCount;
    if (!editor.canSelect(idx)) return;
    editor.select(idx);
    const spacing = controller.sessionInfo!.constraints.y_grid_spacing;
    const current = editor.trajectory[idx].y;
    const res = editor.moveTo(idx, current + steps * spacing);
    if (res.clamped) {
      controller.banner = "clamped to the dog-leg cone";
    }
    render();
  }
  upBtn.addEventListener("click", () => nudgeSelected(-1));
  downBtn.addEventListener("click", () => nudgeSelected(1));

  viewCanvas.addEventListener("pointerdown", (ev) => {
    if (controller.phase !== "ready" || !frame) return;
    const rect = viewCanvas.getBoundingClientRect();
    const px = ev.clientX - rect.left;
    const info = controller.sessionInfo!;
    let best = -1;
    let bestDist = 18;
    info.abscissas.forEach((x, i) => {
      const d = Math.abs(xToPx(frame!, x) - px);
      if (d < bestDist) {
        best = i;
        bestDist = d;
      }
    });
    if (best < 0) return;
    const editor = controller.editor;
    if (!editor.select(best)) {
      controller.banner = "that point is already drilled; pick one ahead of the bit";
      render();
      return;
    }
    controller.clearBanner();
    render();
  });

  viewCanvas.addEventListener("pointermove", (ev) => {
    if (controller.phase !== "ready" || !frame || ev.buttons !== 1) return;
    const editor = controller.editor;
    if (editor.selected === null) return;
    const rect = viewCanvas.getBoundingClientRect();
    const res = editor.moveSelected(pxToY(frame, ev.clientY - rect.top));
    if (res && res.clamped) controller.banner = "clamped to the dog-leg cone";
    render();
  });

  barsCanvas.addEventListener("pointerdown", (ev) => {
    const model = controller.bars();
    if (!model) return;
    const rect = barsCanvas.getBoundingClientRect();
    const i = Math.floor(((ev.clientX - rect.left) / rect.width) * model.levels.length);
    // bar i spans levels P(10(i+1)); highlight the decile band above its lower edge
    const band = Math.min(9, Math.max(0, i + 1));
    controller.selectBand(band === controller.selectedBand ? null : band);
    render();
  });

  (async () => {
    try {
      const { rounds } = await client.rounds();
      roundSelect.innerHTML = "";
      for (const r of rounds) {
        const opt = document.createElement("option");
        opt.value = r.round_id;
        opt.textContent = `${r.round_id} (${r.max_decisions} stands)`;
        roundSelect.appendChild(opt);
      }
    } catch (err) {
      controller.banner = `cannot list rounds: ${String(err)}`;
    }
    render();
  })();

  window.addEventListener("resize", render);
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  main();
}
