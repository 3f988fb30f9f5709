/** Session state machine between the API client and the canvas.
 *
 * Discipline enforced here rather than in the DOM layer:
 *  - one in-flight request at a time; commits and stops refuse to overlap,
 *  - a rejected commit leaves every piece of local state untouched,
 *  - every displayed number (scores, percent, rank) is stored verbatim from
 *    a server response; this module never derives its own. Percentile bars
 *    and band subsets are display aggregations of server-sent scores. */

import { ApiError, ClientLike } from "./client.js";
import { BarModel, buildBars, selectBandMembers } from "./distribution.js";
import { PlanEditor } from "./plan.js";
import type {
  CommitResponse,
  EvaluateResponse,
  RealizationsPayload,
  SessionOpenResponse,
  StateBlock,
} from "./types.js";

export type Phase = "idle" | "ready" | "busy" | "finished";

export interface FinalPanel {
  score: number;
  percent: number | null;
  rank: number;
  finishers: number;
  stoppedEarly: boolean;
}

/** The final screen line; keeps the server's numbers verbatim. */
export function finalPanelText(panel: FinalPanel): string {
  const percent = panel.percent === null ? "n/a" : `${panel.percent}% of optimal`;
  const how = panel.stoppedEarly ? "stopped early" : "drilled to budget";
  return `Final score ${panel.score} | ${percent} | rank ${panel.rank} of ${panel.finishers} (${how})`;
}

export class SessionController {
  phase: Phase = "idle";
  banner: string | null = null;

  private session: SessionOpenResponse | null = null;
  private editorState: PlanEditor | null = null;
  private realizationsPayload: RealizationsPayload | null = null;
  private stateBlock: StateBlock | null = null;
  private lastEval: EvaluateResponse | null = null;
  private prevEval: EvaluateResponse | null = null;
  private band: number | null = null;
  private panel: FinalPanel | null = null;

  constructor(private readonly client: ClientLike) {}

  get editor(): PlanEditor {
    if (!this.editorState) throw new Error("no open session");
    return this.editorState;
  }

  get realizations(): RealizationsPayload | null {
    return this.realizationsPayload;
  }

  get state(): StateBlock | null {
    return this.stateBlock;
  }

  get sessionInfo(): SessionOpenResponse | null {
    return this.session;
  }

  get finalPanel(): FinalPanel | null {
    return this.panel;
  }

  get lastEvaluation(): EvaluateResponse | null {
    return this.lastEval;
  }

  get selectedBand(): number | null {
    return this.band;
  }

  clearBanner(): void {
    this.banner = null;
  }

  private requireReady(): void {
    if (this.phase === "busy") throw new Error("a request is already in flight");
    if (this.phase === "finished") throw new Error("session is finished");
    if (this.phase === "idle") throw new Error("no open session");
  }

  async open(roundId: string, participantId: string): Promise<SessionOpenResponse> {
    if (this.phase !== "idle") throw new Error("session already open");
    this.phase = "busy";
    try {
      const open = await this.client.openSession(roundId, participantId);
      this.session = open;
      this.editorState = PlanEditor.fromSession(open);
      this.realizationsPayload = open.realizations;
      this.stateBlock = open.state;
      this.phase = "ready";
      return open;
    } catch (err) {
      this.phase = "idle";
      this.banner = err instanceof ApiError ? err.detail : String(err);
      throw err;
    }
  }

  /** Score the full planned trajectory against the current ensemble. The
   * previous evaluation slides behind the new one as the gray bars. */
  async evaluatePlan(): Promise<EvaluateResponse> {
    this.requireReady();
    this.phase = "busy";
    try {
      const resp = await this.client.evaluate(this.session!.session_id, this.editor.trajectory);
      this.prevEval = this.lastEval;
      this.lastEval = resp;
      this.phase = "ready";
      return resp;
    } catch (err) {
      this.phase = "ready";
      this.banner = err instanceof ApiError ? err.detail : String(err);
      throw err;
    }
  }

  private async commitAction(action: "continue" | "stop", y?: number): Promise<CommitResponse> {
    this.requireReady();
    this.phase = "busy";
    const planBefore = this.editor.snapshot();
    try {
      const resp = await this.client.commit(this.session!.session_id, action, y);
      if (resp.finished) {
        this.panel = {
          score: resp.score,
          percent: resp.percent,
          rank: resp.rank,
          finishers: resp.finishers,
          stoppedEarly: resp.stopped_early,
        };
        this.phase = "finished";
      } else {
        this.editor.advance(y!, resp.state.dip_deg);
        this.realizationsPayload = resp.realizations;
        this.stateBlock = resp.state;
        this.phase = "ready";
      }
      return resp;
    } catch (err) {
      // rejected commit: restore the plan, mutate nothing else
      this.editor.restore(planBefore);
      this.phase = "ready";
      this.banner = err instanceof ApiError ? err.detail : String(err);
      throw err;
    }
  }

  /** Commit the next planned stand. Finishes automatically when the server
   * says the budget is spent. */
  async commitNext(): Promise<CommitResponse> {
    this.requireReady();
    return this.commitAction("continue", this.editor.nextTarget);
  }

  async stop(): Promise<CommitResponse> {
    return this.commitAction("stop");
  }

  bars(): BarModel | null {
    if (!this.lastEval) return null;
    return buildBars(this.lastEval.scores, this.prevEval ? this.prevEval.scores : null);
  }

  selectBand(band: number | null): void {
    if (band !== null && (!Number.isInteger(band) || band < 0 || band > 9)) {
      throw new RangeError("band must be in 0..9");
    }
    this.band = band;
  }

  /** Realization ids inside the selected decile of the last evaluation;
   * null when nothing is selected or nothing has been evaluated. */
  highlightedMembers(): number[] | null {
    if (this.band === null || !this.lastEval) return null;
    return selectBandMembers(this.lastEval.scores, this.band);
  }
}
