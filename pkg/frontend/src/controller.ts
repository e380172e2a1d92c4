import { ApiError, type SessionApi } from './api.js';
import type {
  DatasetInfo,
  GridPayload,
  Label,
  QueryPayload,
  RankRow,
  SessionConfig,
  TraceRow,
} from './types.js';

export type Phase = 'idle' | 'active' | 'done';

/**
 * Everything a view needs to render one moment of a session. Numbers are
 * copied verbatim from API payloads; the client computes nothing itself.
 */
export interface SessionView {
  phase: Phase;
  sessionId: string | null;
  t: number;
  budget: number;
  anomaliesFound: number;
  /** the one pending query card, null while idle or done */
  card: QueryPayload | null;
  history: TraceRow[];
  top: RankRow[];
  dataset: DatasetInfo | null;
  grid: GridPayload | null;
  /** last non-fatal problem, cleared by the next successful call */
  error: string | null;
}

type Listener = (view: SessionView) => void;

function emptyView(): SessionView {
  return {
    phase: 'idle',
    sessionId: null,
    t: 0,
    budget: 0,
    anomaliesFound: 0,
    card: null,
    history: [],
    top: [],
    dataset: null,
    grid: null,
    error: null,
  };
}

/**
 * Client mirror of one labeling session. Exactly one card is pending at a
 * time and every label waits for the server's ack; a submit while another
 * is in flight, or against a card that is no longer pending, is a no-op.
 */
export class SessionController {
  private view = emptyView();
  private listeners = new Set<Listener>();
  private inFlight = false;

  constructor(
    private readonly api: SessionApi,
    private readonly onSessionId: (id: string | null) => void = () => {},
  ) {}

  get(): SessionView {
    return this.view;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private commit(patch: Partial<SessionView>) {
    this.view = { ...this.view, ...patch };
    for (const fn of this.listeners) fn(this.view);
  }

  /** Create a session and show its first card. */
  async start(dataset: string | { name: string; csv: string }, config: SessionConfig): Promise<void> {
    const created = await this.api.createSession(dataset, config);
    this.onSessionId(created.session_id);
    this.commit({ sessionId: created.session_id, error: null });
    await this.syncFromServer();
  }

  /** Rebuild the view of an existing session, e.g. after a page reload. */
  async resume(sessionId: string): Promise<void> {
    this.commit({ sessionId, error: null });
    await this.syncFromServer();
  }

  /**
   * Label the pending card. Returns true only when the server accepted
   * the label; a submit with no pending card, a stale index, or another
   * label still in flight is dropped. A 409 conflict means the card went
   * stale server-side: the session is refetched so the real pending card
   * replaces it.
   */
  async label(index: number, label: Label): Promise<boolean> {
    const { card, sessionId, phase } = this.view;
    if (this.inFlight || phase !== 'active' || !sessionId || !card || card.index !== index) {
      return false;
    }
    this.inFlight = true;
    try {
      await this.api.submitLabel(sessionId, index, label);
      this.commit({ error: null });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.commit({ error: err.message });
        await this.syncFromServer();
      } else {
        this.commit({ error: err instanceof Error ? err.message : String(err) });
      }
      return false;
    } finally {
      this.inFlight = false;
    }
    await this.syncFromServer();
    return true;
  }

  explain(index: number) {
    const { sessionId } = this.view;
    if (!sessionId) return Promise.reject(new Error('no session'));
    return this.api.getExplanation(sessionId, index);
  }

  /** Adopt the server's view wholesale: trace, ranking, card, overlay. */
  private async syncFromServer(): Promise<void> {
    const { sessionId } = this.view;
    if (!sessionId) return;
    const state = await this.api.getState(sessionId);
    const done = state.done;
    if (done) this.onSessionId(null);
    this.commit({
      phase: done ? 'done' : 'active',
      t: state.t,
      budget: state.budget,
      anomaliesFound: state.anomalies_found,
      card: done ? null : state.pending,
      history: state.trace,
      top: state.top,
      dataset: state.dataset,
      grid: state.grid,
    });
  }
}
