import {
  Assignment,
  NextResponse,
  ResponseRecord,
  responseRecordSchema,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Client for the study service HTTP API (and nothing beyond it). */
export class StudyApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => globalThis.fetch(...args),
    private readonly retries = 2,
    private readonly retryDelayMs = 500,
  ) {}

  async openAssignment(workerId: string): Promise<Assignment> {
    return this.request('POST', '/assignments', { worker_id: workerId });
  }

  async nextQuestion(assignmentId: string): Promise<NextResponse> {
    return this.request('GET', `/assignments/${assignmentId}/next`);
  }

  /** Validate locally against the service schema, then send with retry on
   * network failures (fire-and-confirm; 4xx responses are not retried). */
  async submitResponse(assignmentId: string, record: ResponseRecord): Promise<void> {
    const parsed = responseRecordSchema.parse(record);
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt += 1) {
      try {
        await this.request('POST', `/assignments/${assignmentId}/responses`, parsed);
        return;
      } catch (error) {
        if (error instanceof ApiError) throw error;
        lastError = error;
        if (attempt < this.retries) {
          await new Promise((r) => setTimeout(r, this.retryDelayMs));
        }
      }
    }
    throw lastError;
  }

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.detail === 'string') detail = payload.detail;
      } catch {
        // detail stays as statusText
      }
      throw new ApiError(response.status, detail);
    }
    return response.json();
  }
}
