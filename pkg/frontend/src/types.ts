/** Wire types mirroring the elicitation service payloads exactly.
 *
 * The client never mutates theta values it received from the service; the
 * view layer reads them as-is and all authoritative state stays server-side.
 */

export type SessionStatus = "active" | "finished";

export type SessionMode = "human" | "scripted";

/** One selectable option: a sampled objective estimate for one action. */
export interface OptionView {
  index: number;
  action: string;
  theta: number[];
}

/** Response of GET /sessions/{id}/options. */
export interface Presentation {
  episode: number;
  options: OptionView[];
}

/** Response of POST /sessions. */
export interface CreatedSession {
  id: string;
  status: SessionStatus;
  episode: number;
}

/** Response of POST /sessions/{id}/choice. */
export interface AdvanceResult {
  episode: number;
  observation: number[];
  status: SessionStatus;
  cum_regret?: number;
}

/** One played episode as reported by GET /sessions/{id}/history. */
export interface HistoryEntry {
  episode: number;
  options: OptionView[];
  chosen_index: number;
  chosen_by: string;
  observation: number[];
  posterior_means: number[][];
}

/** Response of GET /sessions/{id}/history. */
export interface SessionHistory {
  id: string;
  mode: string;
  status: SessionStatus;
  episode: number;
  horizon: number;
  history: HistoryEntry[];
  cum_regret?: number;
}

/** Body of POST /sessions. Environment and preference configs are passed
 * through verbatim; the service validates them. */
export interface CreateSessionRequest {
  env: unknown;
  mode: SessionMode;
  horizon: number;
  seed: number;
  preference?: unknown;
}

/** Error envelope the service returns on every non-2xx response. */
export interface ApiErrorPayload {
  code: string;
  message: string;
}

/** Client-side snapshot of one session: the service payloads plus the
 * little bit of flow state the browser needs (which presentation is
 * pending and the regret trace for the optional chart). */
export interface SessionView {
  id: string;
  episode: number;
  status: SessionStatus;
  /** Options awaiting a choice, or null between advance and present. */
  pending: Presentation | null;
  history: HistoryEntry[];
  /** Cumulative regret after each played episode, when the service
   * reports it (sessions created with a preference). */
  regretTrace: number[];
  /** Last error surfaced to the user; cleared on the next success. */
  lastError: string | null;
}
