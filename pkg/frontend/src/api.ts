import type {
  CreateResponse,
  DatasetListing,
  ExplainPayload,
  Label,
  LabelResponse,
  SessionConfig,
  StatePayload,
} from './types.js';

/** Error body the service attaches to every non-2xx response. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** The slice of the HTTP API the UI consumes; mock this in tests. */
export interface SessionApi {
  listDatasets(): Promise<{ datasets: DatasetListing[] }>;
  createSession(dataset: string | { name: string; csv: string }, config: SessionConfig): Promise<CreateResponse>;
  getState(sessionId: string): Promise<StatePayload>;
  submitLabel(sessionId: string, index: number, label: Label): Promise<LabelResponse>;
  getExplanation(sessionId: string, index: number): Promise<ExplainPayload>;
}

export class HttpSessionApi implements SessionApi {
  constructor(
    private readonly baseUrl = '',
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!res.ok) {
      let code = 'http_error';
      let message = `${res.status} ${res.statusText}`;
      try {
        const body = (await res.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ApiError(res.status, code, message);
    }
    return (await res.json()) as T;
  }

  listDatasets() {
    return this.request<{ datasets: DatasetListing[] }>('/api/datasets');
  }

  createSession(dataset: string | { name: string; csv: string }, config: SessionConfig) {
    return this.request<CreateResponse>('/api/sessions', {
      method: 'POST',
      body: JSON.stringify({ dataset, config }),
    });
  }

  getState(sessionId: string) {
    return this.request<StatePayload>(`/api/sessions/${sessionId}`);
  }

  submitLabel(sessionId: string, index: number, label: Label) {
    return this.request<LabelResponse>(`/api/sessions/${sessionId}/label`, {
      method: 'POST',
      body: JSON.stringify({ index, label }),
    });
  }

  getExplanation(sessionId: string, index: number) {
    return this.request<ExplainPayload>(`/api/sessions/${sessionId}/explain/${index}`);
  }
}
