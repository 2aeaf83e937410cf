/** Application state container: plain data, pure update helpers, and a
 * tiny subscribe/notify store. Every view renders from this state plus
 * the last API responses; nothing is computed client-side.
 */
import { BinFilter, FilterState, MetricFilter, emptyFilters } from "./query.js";
import {
  AggregateResponse,
  CombinationTable,
  DensityRaster,
  GeoJsonCollection,
  HistogramResponse,
  Manifest,
  QueryResponse,
  ThumbnailsResponse,
  Timeline,
  TripSelectResponse,
} from "./types.js";

export type ChoroplethMetric = "count" | "accuracy" | "perplexity";

export interface MapLayers {
  choropleth: boolean;
  density: boolean;
  points: boolean;
}

export interface Responses {
  query?: QueryResponse;
  aggregate?: AggregateResponse;
  combinations?: CombinationTable;
  histAccuracy?: HistogramResponse;
  histPerplexity?: HistogramResponse;
  density?: DensityRaster;
  thumbnails?: ThumbnailsResponse;
  timeline?: Timeline;
  tripSelect?: TripSelectResponse;
}

export interface AppState {
  manifest: Manifest | null;
  regions: GeoJsonCollection | null;
  streets: GeoJsonCollection | null;
  filters: FilterState;
  layers: MapLayers;
  choropleth: { metric: ChoroplethMetric; model: string | null };
  selectedTrip: string | null;
  sliderIdx: number;
  focusFrame: { trip_id: string; frame_idx: number } | null;
  drawing: boolean;
  draftPolygon: Array<[number, number]>;
  responses: Responses;
}

export function initialState(): AppState {
  return {
    manifest: null,
    regions: null,
    streets: null,
    filters: emptyFilters(),
    layers: { choropleth: true, density: false, points: true },
    choropleth: { metric: "count", model: null },
    selectedTrip: null,
    sliderIdx: 0,
    focusFrame: null,
    drawing: false,
    draftPolygon: [],
    responses: {},
  };
}

export type Listener = (state: AppState) => void;

export class Store {
  private state: AppState;
  private listeners: Listener[] = [];

  constructor(state: AppState = initialState()) {
    this.state = state;
  }

  get(): AppState {
    return this.state;
  }

  update(fn: (s: AppState) => AppState): void {
    this.state = fn(this.state);
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }
}

// --- pure state transitions ---------------------------------------------------

function withFilters(s: AppState, filters: FilterState): AppState {
  return { ...s, filters };
}

export function toggleCondition(
  s: AppState,
  dim: "timeOfDay" | "weather" | "streetType",
  value: string,
): AppState {
  const current = s.filters[dim];
  const next = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  return withFilters(s, { ...s.filters, [dim]: next });
}

export function setMetricFilter(s: AppState, metric: MetricFilter | null): AppState {
  return withFilters(s, { ...s.filters, metric });
}

export function setPattern(s: AppState, pattern: Record<string, boolean> | null): AppState {
  return withFilters(s, { ...s.filters, pattern });
}

export function setBinFilter(s: AppState, binFilter: BinFilter | null): AppState {
  return withFilters(s, { ...s.filters, binFilter });
}

export function setPolygon(s: AppState, polygon: Array<[number, number]> | null): AppState {
  return withFilters(s, { ...s.filters, polygon });
}

export function clearFilters(s: AppState): AppState {
  return withFilters(s, emptyFilters());
}

export function toggleLayer(s: AppState, layer: keyof MapLayers): AppState {
  return { ...s, layers: { ...s.layers, [layer]: !s.layers[layer] } };
}

export function setChoropleth(
  s: AppState,
  metric: ChoroplethMetric,
  model: string | null,
): AppState {
  return { ...s, choropleth: { metric, model } };
}

export function selectTrip(s: AppState, tripId: string | null): AppState {
  return { ...s, selectedTrip: tripId, sliderIdx: 0 };
}

export function setSlider(s: AppState, idx: number): AppState {
  return { ...s, sliderIdx: idx };
}

export function setFocusFrame(
  s: AppState,
  focus: { trip_id: string; frame_idx: number } | null,
): AppState {
  return { ...s, focusFrame: focus };
}

export function startDrawing(s: AppState): AppState {
  return { ...s, drawing: true, draftPolygon: [] };
}

export function addDraftVertex(s: AppState, vertex: [number, number]): AppState {
  return { ...s, draftPolygon: [...s.draftPolygon, vertex] };
}

/** Close the draft: with >= 3 vertices it becomes the polygon filter. */
export function finishPolygon(s: AppState): AppState {
  const polygon = s.draftPolygon.length >= 3 ? s.draftPolygon : null;
  return {
    ...withFilters(s, { ...s.filters, polygon }),
    drawing: false,
    draftPolygon: [],
  };
}

export function setResponse<K extends keyof Responses>(
  s: AppState,
  key: K,
  value: Responses[K],
): AppState {
  return { ...s, responses: { ...s.responses, [key]: value } };
}
