import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, isAbort } from "../src/api";

interface Pending {
  url: string;
  init: RequestInit;
  resolve(body: unknown, status?: number): void;
}

/** fetch stub whose responses resolve only when the test says so, and
 * which rejects with AbortError when the request's signal fires. */
function controllableFetch() {
  const pending: Pending[] = [];
  const fetchFn = ((url: string, init: RequestInit) =>
    new Promise<Response>((resolve, reject) => {
      const entry: Pending = {
        url,
        init,
        resolve: (body, status = 200) =>
          resolve(
            new Response(JSON.stringify(body), {
              status,
              headers: { "content-type": "application/json" },
            }),
          ),
      };
      init.signal?.addEventListener("abort", () =>
        reject(new DOMException("aborted", "AbortError")),
      );
      pending.push(entry);
    })) as unknown as typeof fetch;
  return { fetchFn, pending };
}

describe("ApiClient coalescing", () => {
  it("a newer request for the same view aborts the in-flight one", async () => {
    const { fetchFn, pending } = controllableFetch();
    const api = new ApiClient("http://api", fetchFn);

    const first = api.post("query", "/query", { n: 1 });
    const second = api.post("query", "/query", { n: 2 });
    expect(pending).toHaveLength(2);

    const firstErr = await first.then(
      () => null,
      (err) => err,
    );
    expect(isAbort(firstErr)).toBe(true);

    pending[1].resolve({ total: 7 });
    await expect(second).resolves.toEqual({ total: 7 });
  });

  it("different views run concurrently", async () => {
    const { fetchFn, pending } = controllableFetch();
    const api = new ApiClient("http://api", fetchFn);

    const a = api.post("query", "/query", {});
    const b = api.post("aggregate", "/aggregate", {});
    expect(pending).toHaveLength(2);
    pending[0].resolve({ total: 1 });
    pending[1].resolve({ reports: [] });
    await expect(a).resolves.toEqual({ total: 1 });
    await expect(b).resolves.toEqual({ reports: [] });
  });

  it("parses the error envelope", async () => {
    const { fetchFn, pending } = controllableFetch();
    const api = new ApiClient("http://api", fetchFn);
    const call = api.post("query", "/query", {});
    pending[0].resolve({ error: { code: "validation", message: "bad expr" } }, 400);
    const err = await call.then(
      () => null,
      (e) => e,
    );
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("validation");
    expect((err as ApiError).message).toBe("bad expr");
  });

  it("joins the base url", () => {
    const api = new ApiClient("http://api:8000/", (() => {
      throw new Error("unused");
    }) as unknown as typeof fetch);
    expect(api.url("/health")).toBe("http://api:8000/health");
  });
});
