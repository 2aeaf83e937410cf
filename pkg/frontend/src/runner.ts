/** Executes the request plan derived from state, skipping requests whose
 * JSON is unchanged and dropping responses that arrive after the plan has
 * moved on (the ApiClient also aborts superseded calls per view key).
 */
import { ApiClient, isAbort } from "./api.js";
import { RequestPlan, requestsFor } from "./effects.js";
import { AppState, Responses, Store, setResponse } from "./state.js";

export class RequestRunner {
  private readonly api: ApiClient;
  private readonly store: Store;
  private readonly issued = new Map<string, string>();

  constructor(api: ApiClient, store: Store) {
    this.api = api;
    this.store = store;
  }

  /** Issue whatever the state implies; safe to call on every state change. */
  sync(state: AppState): void {
    const plan: RequestPlan = requestsFor(state);
    for (const [view, request] of Object.entries(plan)) {
      const key = request ? JSON.stringify(request) : "";
      if (this.issued.get(view) === key) continue;
      this.issued.set(view, key);
      if (!request) {
        this.store.update((s) => setResponse(s, view as keyof Responses, undefined));
        continue;
      }
      const apply = (payload: unknown) => {
        if (this.issued.get(view) !== key) return; // stale
        this.store.update((s) => setResponse(s, view as keyof Responses, payload as never));
      };
      const promise =
        request.method === "GET"
          ? this.api.get<unknown>(view, request.path)
          : this.api.post<unknown>(view, request.path, request.body);
      promise.then(apply).catch((err) => {
        if (!isAbort(err)) console.error(`request ${view} failed:`, err);
      });
    }
  }
}
