/** Canned server payloads used across the view tests. */
import { AppState, initialState } from "../src/state";
import {
  AggregateResponse,
  CombinationTable,
  FrameDoc,
  GeoJsonCollection,
  HistogramResponse,
  Manifest,
  QueryResponse,
  ThumbnailsResponse,
  Timeline,
  TripSelectResponse,
} from "../src/types";

export const MODELS = ["tcnn1", "cnn_lstm", "fcn_lstm"];

export const MANIFEST: Manifest = {
  models: MODELS,
  counts: { trips: 2, frames: 5, segments: 1, regions: 2 },
  created_at: "2026-01-01T00:00:00+00:00",
  schema_version: 1,
};

function square(lat0: number, lon0: number, d: number): number[][][] {
  return [[
    [lon0, lat0],
    [lon0 + d, lat0],
    [lon0 + d, lat0 + d],
    [lon0, lat0 + d],
    [lon0, lat0],
  ]];
}

export const REGIONS: GeoJsonCollection = {
  type: "FeatureCollection",
  features: [
    {
      type: "Feature",
      properties: { region_id: "10000" },
      geometry: { type: "Polygon", coordinates: square(40.70, -74.00, 0.02) },
    },
    {
      type: "Feature",
      properties: { region_id: "10001" },
      geometry: { type: "Polygon", coordinates: square(40.70, -73.98, 0.02) },
    },
  ],
};

export const STREETS: GeoJsonCollection = {
  type: "FeatureCollection",
  features: [
    {
      type: "Feature",
      properties: { segment_id: "road", street_type: "city_street" },
      geometry: {
        type: "LineString",
        coordinates: [[-74.0, 40.705], [-73.98, 40.705]],
      },
    },
  ],
};

export function frameDoc(tripId: string, idx: number, lat: number, lon: number): FrameDoc {
  return {
    trip_id: tripId,
    frame_idx: idx,
    timestamp: 1000 + idx,
    location: { lat, lon },
    speed: 5.5,
    actual: "go_straight",
    scores: Object.fromEntries(MODELS.map((m) => [m, [1.44, 1.14, 0.2, 0.2]])),
    predicted: Object.fromEntries(MODELS.map((m) => [m, "slow_stop"])),
    correct: Object.fromEntries(MODELS.map((m) => [m, false])),
    perplexity: Object.fromEntries(MODELS.map((m) => [m, 2.5])),
    segment_id: "road",
    region_id: "10000",
  };
}

export function queryResponse(docs: FrameDoc[]): QueryResponse {
  return {
    total: docs.length,
    page: 0,
    page_size: 500,
    ids: docs.map((d) => ({ trip_id: d.trip_id, frame_idx: d.frame_idx })),
    docs,
  };
}

export const AGGREGATE: AggregateResponse = {
  key: "region",
  reports: [
    {
      group_key: "10000",
      per_model: Object.fromEntries(
        MODELS.map((m) => [m, { count: 3, accuracy: 0.4, mean_perplexity: 2.0 }]),
      ),
      combined: { count: 9, accuracy: 0.4, mean_perplexity: 2.0 },
    },
    {
      group_key: "10001",
      per_model: Object.fromEntries(
        MODELS.map((m) => [m, { count: 2, accuracy: 0.9, mean_perplexity: 1.4 }]),
      ),
      combined: { count: 6, accuracy: 0.9, mean_perplexity: 1.4 },
    },
  ],
};

export function combinationTable(): CombinationTable {
  const rows = [];
  for (const a of [false, true]) {
    for (const b of [false, true]) {
      for (const c of [false, true]) {
        rows.push({
          pattern: { tcnn1: a, cnn_lstm: b, fcn_lstm: c },
          count: (a ? 1 : 0) + (b ? 2 : 0) + (c ? 4 : 0) + 10,
        });
      }
    }
  }
  return { models: MODELS, rows, total: rows.reduce((s, r) => s + r.count, 0) };
}

export const HISTOGRAM: HistogramResponse = {
  dimension: "accuracy_bin",
  items: "trips",
  rows: Array.from({ length: 10 }, (_, i) => ({
    label: `${i * 10}-${i * 10 + 10}`,
    count: i === 4 ? 3 : 0,
  })),
};

export function timeline(tripId: string, n = 5): Timeline {
  const idxs = Array.from({ length: n }, (_, i) => i);
  return {
    trip_id: tripId,
    frame_count: n,
    frame_idx: idxs,
    timestamp: idxs.map((i) => 1000 + 333 * i),
    location: idxs.map((i) => ({ lat: 40.705 + 0.001 * i, lon: -73.995 + 0.001 * i })),
    speed: idxs.map((i) => 5 + i),
    actual: idxs.map((i) => (i % 2 ? "slow_stop" : "go_straight")),
    predicted: Object.fromEntries(
      MODELS.map((m) => [m, idxs.map((i) => (i % 2 ? "go_straight" : "slow_stop"))]),
    ),
    perplexity: Object.fromEntries(MODELS.map((m) => [m, idxs.map((i) => 1.5 + 0.2 * i)])),
    scores: Object.fromEntries(
      MODELS.map((m) => [m, idxs.map(() => [1.44, 1.14, 0.2, 0.2])]),
    ),
  };
}

export function thumbnails(docs: FrameDoc[]): ThumbnailsResponse {
  return {
    frames: docs.map((d) => ({ trip_id: d.trip_id, frame_idx: d.frame_idx })),
    image_urls: docs.map((d) => `/frames/${d.trip_id}/${d.frame_idx}/image`),
    docs,
    skipped_missing: 1,
  };
}

export const TRIP_SELECT: TripSelectResponse = {
  trip_ids: ["trip00000", "trip00001"],
  aggregates: {
    trip00000: Object.fromEntries(
      MODELS.map((m) => [m, { accuracy: 0.45, mean_perplexity: 2.1 }]),
    ),
    trip00001: Object.fromEntries(
      MODELS.map((m) => [m, { accuracy: 0.8, mean_perplexity: 1.3 }]),
    ),
  },
};

/** State with geometry + canned responses, as if all requests landed. */
export function loadedState(): AppState {
  const docs = [
    frameDoc("trip00000", 0, 40.705, -73.995),
    frameDoc("trip00000", 3, 40.706, -73.994),
    frameDoc("trip00001", 0, 40.71, -73.975),
  ];
  const s = initialState();
  return {
    ...s,
    manifest: MANIFEST,
    regions: REGIONS,
    streets: STREETS,
    responses: {
      query: queryResponse(docs),
      aggregate: AGGREGATE,
      combinations: combinationTable(),
      histAccuracy: HISTOGRAM,
      histPerplexity: { ...HISTOGRAM, dimension: "perplexity_bin" },
      thumbnails: thumbnails(docs.slice(0, 2)),
      tripSelect: TRIP_SELECT,
      timeline: timeline("trip00000"),
    },
  };
}
