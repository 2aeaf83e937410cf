/** Pure mapping from application state to the API requests each view needs.
 *
 * The runner diffs these against the last issued request per view key and
 * re-fetches only what changed; the ApiClient aborts superseded calls.
 */
import { AppState } from "./state.js";
import { MATCH_ALL, QueryNode, buildQuery } from "./query.js";
import { BBoxObj } from "./types.js";

export interface ApiRequest {
  method: "GET" | "POST";
  path: string;
  body?: unknown;
}

export type RequestPlan = Record<string, ApiRequest | null>;

export const QUERY_PAGE_SIZE = 500;
export const THUMBNAIL_COUNT = 24;
export const DENSITY_CELLS = 72;

function selectionOf(expr: QueryNode | null): Record<string, unknown> {
  return expr ? { expr } : {};
}

export function regionsBBox(state: AppState): BBoxObj | null {
  if (!state.regions || !state.regions.features.length) return null;
  let minLat = Infinity;
  let minLon = Infinity;
  let maxLat = -Infinity;
  let maxLon = -Infinity;
  for (const feature of state.regions.features) {
    const polys =
      feature.geometry.type === "Polygon"
        ? [feature.geometry.coordinates as number[][][]]
        : (feature.geometry.coordinates as number[][][][]);
    for (const poly of polys) {
      for (const ring of poly) {
        for (const [lon, lat] of ring) {
          minLat = Math.min(minLat, lat);
          maxLat = Math.max(maxLat, lat);
          minLon = Math.min(minLon, lon);
          maxLon = Math.max(maxLon, lon);
        }
      }
    }
  }
  return { min_lat: minLat, min_lon: minLon, max_lat: maxLat, max_lon: maxLon };
}

/** Every server request implied by the current state, keyed by view. */
export function requestsFor(state: AppState): RequestPlan {
  const expr = buildQuery(state.filters);
  const selection = selectionOf(expr);
  const bbox = regionsBBox(state);
  const model = state.choropleth.model;
  const histModel = model ?? state.manifest?.models[0] ?? null;

  return {
    query: {
      method: "POST",
      path: "/query",
      body: { expr: expr ?? MATCH_ALL, page: 0, page_size: QUERY_PAGE_SIZE },
    },
    aggregate: {
      method: "POST",
      path: "/aggregate",
      body: { selection, key: "region" },
    },
    combinations: {
      method: "POST",
      path: "/combinations",
      body: { selection },
    },
    histAccuracy: histModel
      ? {
          method: "POST",
          path: "/histogram",
          body: { selection, dimension: "accuracy_bin", model: histModel, items: "trips" },
        }
      : null,
    histPerplexity: histModel
      ? {
          method: "POST",
          path: "/histogram",
          body: { selection, dimension: "perplexity_bin", model: histModel, items: "trips" },
        }
      : null,
    density:
      state.layers.density && bbox
        ? {
            method: "POST",
            path: "/density",
            body: { selection, bbox, width: DENSITY_CELLS, height: DENSITY_CELLS },
          }
        : null,
    thumbnails: {
      method: "POST",
      path: "/thumbnails",
      body: { selection, k: THUMBNAIL_COUNT },
    },
    tripSelect: state.manifest
      ? {
          method: "POST",
          path: "/trips/select",
          body: state.filters.metric
            ? {
                models: state.filters.metric.models,
                metric: state.filters.metric.metric,
                op: state.filters.metric.op,
                threshold: state.filters.metric.threshold,
              }
            : {
                // accuracy >= 0 selects every trip (list view default)
                models: state.manifest.models,
                metric: "accuracy",
                op: ">=",
                threshold: 0,
              },
        }
      : null,
    timeline: state.selectedTrip
      ? { method: "GET", path: `/trips/${state.selectedTrip}/timeline` }
      : null,
  };
}
