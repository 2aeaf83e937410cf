/** App configuration: one JSON file next to index.html. */

export interface AppConfig {
  /** Base URL of the admgeo HTTP API. */
  apiBaseUrl: string;
  /** Slippy-tile template ({z}/{x}/{y}) or null for a blank basemap. */
  tileUrl: string | null;
}

export const DEFAULT_CONFIG: AppConfig = {
  apiBaseUrl: "http://127.0.0.1:8000",
  tileUrl: null,
};

export async function loadConfig(
  fetchFn: typeof fetch = fetch.bind(globalThis),
): Promise<AppConfig> {
  try {
    const response = await fetchFn("./config.json");
    if (!response.ok) return DEFAULT_CONFIG;
    const raw = (await response.json()) as Partial<AppConfig>;
    return {
      apiBaseUrl: typeof raw.apiBaseUrl === "string" ? raw.apiBaseUrl : DEFAULT_CONFIG.apiBaseUrl,
      tileUrl: typeof raw.tileUrl === "string" ? raw.tileUrl : null,
    };
  } catch {
    return DEFAULT_CONFIG;
  }
}
