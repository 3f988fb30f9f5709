/** Thin fetch wrapper over the benchmark server's JSON endpoints. */

import type {
  CommitResponse,
  EvaluateResponse,
  Point,
  RoundsResponse,
  ScoreboardResponse,
  SessionOpenResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? typeof body.detail === "string"
          ? body.detail
          : JSON.stringify(body.detail)
        : resp.statusText;
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  };
}

/** The subset of the API the session controller needs; the tests substitute
 * scripted fakes for it. */
export interface ClientLike {
  openSession(roundId: string, participantId: string): Promise<SessionOpenResponse>;
  evaluate(sessionId: string, trajectory: Point[]): Promise<EvaluateResponse>;
  commit(sessionId: string, action: "continue" | "stop", y?: number): Promise<CommitResponse>;
}

export class ApiClient implements ClientLike {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  health(): Promise<{ status: string }> {
    return request(this.url("/health"));
  }

  rounds(): Promise<RoundsResponse> {
    return request(this.url("/rounds"));
  }

  openSession(roundId: string, participantId: string): Promise<SessionOpenResponse> {
    return request(
      this.url(`/rounds/${encodeURIComponent(roundId)}/sessions`),
      post({ participant_id: participantId }),
    );
  }

  evaluate(sessionId: string, trajectory: Point[]): Promise<EvaluateResponse> {
    return request(
      this.url(`/sessions/${encodeURIComponent(sessionId)}/evaluate`),
      post({ trajectory }),
    );
  }

  commit(sessionId: string, action: "continue" | "stop", y?: number): Promise<CommitResponse> {
    const payload = action === "continue" ? { action, y } : { action };
    return request(this.url(`/sessions/${encodeURIComponent(sessionId)}/commit`), post(payload));
  }

  scoreboard(roundId: string): Promise<ScoreboardResponse> {
    return request(this.url(`/rounds/${encodeURIComponent(roundId)}/scoreboard`));
  }
}
