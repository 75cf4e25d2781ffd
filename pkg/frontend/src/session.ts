/** Session flow control.
 *
 * Enforces the strict present -> choose -> advance order with a single
 * active request per session: a choice can only follow a presentation, a
 * second submission for the same episode is suppressed client-side (the
 * episode number is the idempotency key), and a submission while another
 * request is in flight is suppressed rather than queued. Errors are
 * surfaced on the view without losing state, so the user can retry.
 * Nothing is optimistic: the view only changes after the service confirms.
 */
import { ServiceClient } from "./client.js";
import type {
  AdvanceResult,
  CreateSessionRequest,
  Presentation,
  SessionView,
} from "./types.js";

export type ChoiceOutcome =
  | { kind: "advanced"; result: AdvanceResult; next: Presentation | null }
  | { kind: "suppressed"; reason: "duplicate" | "busy" };

export class SessionController {
  private readonly client: ServiceClient;
  private readonly view: SessionView;
  private inFlight = false;
  /** Episode whose choice has been submitted — the idempotency key. Claimed
   * before the request goes out, released only if the service never
   * accepted it. */
  private submittedEpisode: number | null = null;

  private constructor(client: ServiceClient, view: SessionView) {
    this.client = client;
    this.view = view;
  }

  static async create(
    client: ServiceClient,
    request: CreateSessionRequest,
  ): Promise<SessionController> {
    const created = await client.createSession(request);
    return new SessionController(client, {
      id: created.id,
      episode: created.episode,
      status: created.status,
      pending: null,
      history: [],
      regretTrace: [],
      lastError: null,
    });
  }

  get state(): Readonly<SessionView> {
    return this.view;
  }

  /** Fetch the current presentation. Idempotent: while no choice has been
   * submitted the service returns the same options, and a pending
   * presentation is reused without a request. */
  async present(): Promise<Presentation> {
    if (this.view.pending) return this.view.pending;
    if (this.view.status === "finished") {
      throw new Error("session is finished");
    }
    if (this.inFlight) throw new Error("another request is in flight");
    this.inFlight = true;
    try {
      const presentation = await this.client.options(this.view.id);
      this.view.pending = presentation;
      this.view.lastError = null;
      return presentation;
    } catch (error) {
      this.view.lastError = describe(error);
      throw error;
    } finally {
      this.inFlight = false;
    }
  }

  /** Post the choice for the pending presentation, then fetch the next one.
   * Returns a suppressed outcome instead of issuing a second request when
   * the episode was already submitted or a request is still in flight. */
  async submitAndAdvance(index: number): Promise<ChoiceOutcome> {
    const pending = this.view.pending;
    if (!pending) throw new Error("no pending presentation; call present() first");
    if (this.submittedEpisode === pending.episode) {
      return { kind: "suppressed", reason: "duplicate" };
    }
    if (this.inFlight) {
      return { kind: "suppressed", reason: "busy" };
    }
    this.inFlight = true;
    // Claim the episode before the request: a second click during the
    // round-trip is suppressed by the key, not by timing.
    this.submittedEpisode = pending.episode;
    let result: AdvanceResult;
    try {
      result = await this.client.choose(this.view.id, index);
    } catch (error) {
      // The service rejected or never saw the choice: the episode stays
      // submittable and the presentation stays on screen.
      this.submittedEpisode = null;
      this.view.lastError = describe(error);
      this.inFlight = false;
      throw error;
    }
    this.view.history.push({
      episode: result.episode,
      options: pending.options,
      chosen_index: index,
      chosen_by: "human",
      observation: result.observation,
      posterior_means: [],
    });
    this.view.episode = result.episode;
    this.view.status = result.status;
    this.view.pending = null;
    if (result.cum_regret !== undefined) this.view.regretTrace.push(result.cum_regret);
    this.view.lastError = null;
    let next: Presentation | null = null;
    try {
      if (result.status === "active") {
        next = await this.client.options(this.view.id);
        this.view.pending = next;
      }
    } catch (error) {
      // The choice is already recorded server-side; present() retries the
      // fetch, so only surface the error.
      this.view.lastError = describe(error);
    } finally {
      this.inFlight = false;
    }
    return { kind: "advanced", result, next };
  }

  /** Replace the client-side history with the service's authoritative one
   * (brings in posterior means, which choices alone do not carry). */
  async refreshHistory(): Promise<void> {
    const authoritative = await this.client.history(this.view.id);
    this.view.history = authoritative.history;
    this.view.episode = authoritative.episode;
    this.view.status = authoritative.status;
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
