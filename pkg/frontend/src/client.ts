/** Typed HTTP client for the elicitation service.
 *
 * Thin request plumbing only: every non-2xx response carries the service's
 * flat {code, message} envelope and is rethrown as ServiceError; network
 * failures propagate as-is so callers can tell "service said no" from
 * "service unreachable".
 */
import type {
  AdvanceResult,
  ApiErrorPayload,
  CreateSessionRequest,
  CreatedSession,
  Presentation,
  SessionHistory,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchImpl(`${this.base}/healthz`);
      return response.ok;
    } catch {
      return false;
    }
  }

  createSession(body: CreateSessionRequest): Promise<CreatedSession> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  options(sessionId: string, frontOnly = false): Promise<Presentation> {
    const query = frontOnly ? "?front_only=true" : "";
    return this.request(`/sessions/${sessionId}/options${query}`);
  }

  /** Submit a choice. Index null asks the scripted oracle to pick. */
  choose(sessionId: string, index: number | null): Promise<AdvanceResult> {
    return this.request(`/sessions/${sessionId}/choice`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(index === null ? {} : { index }),
    });
  }

  history(sessionId: string): Promise<SessionHistory> {
    return this.request(`/sessions/${sessionId}/history`);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) {
      let payload: ApiErrorPayload = { code: "unknown", message: response.statusText };
      try {
        payload = (await response.json()) as ApiErrorPayload;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ServiceError(response.status, payload.code, payload.message);
    }
    return (await response.json()) as T;
  }
}
