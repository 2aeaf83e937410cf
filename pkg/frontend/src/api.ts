/** HTTP client with per-view request coalescing: issuing a new request
 * under the same view key aborts the one still in flight, so stale
 * responses can never land after fresher ones.
 */

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

interface ErrorEnvelope {
  error?: { code?: string; message?: string };
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;
  private readonly inflight = new Map<string, AbortController>();

  constructor(baseUrl: string, fetchFn: typeof fetch = fetch.bind(globalThis)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  url(path: string): string {
    return this.baseUrl + path;
  }

  /** POST under a view key; supersedes any in-flight request for that key. */
  async post<T>(view: string, path: string, body: unknown): Promise<T> {
    return this.issue<T>(view, path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async get<T>(view: string, path: string): Promise<T> {
    return this.issue<T>(view, path, { method: "GET" });
  }

  private async issue<T>(view: string, path: string, init: RequestInit): Promise<T> {
    this.inflight.get(view)?.abort();
    const controller = new AbortController();
    this.inflight.set(view, controller);
    try {
      const response = await this.fetchFn(this.url(path), {
        ...init,
        signal: controller.signal,
      });
      if (!response.ok) {
        let code = "http_error";
        let message = `${response.status} ${response.statusText}`;
        try {
          const envelope = (await response.json()) as ErrorEnvelope;
          if (envelope.error) {
            code = envelope.error.code ?? code;
            message = envelope.error.message ?? message;
          }
        } catch {
          // non-JSON error body; keep the status line
        }
        throw new ApiError(response.status, code, message);
      }
      return (await response.json()) as T;
    } finally {
      if (this.inflight.get(view) === controller) this.inflight.delete(view);
    }
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
