/** Payload shapes of the admgeo HTTP API (all numbers are server-computed). */

export interface FrameId {
  trip_id: string;
  frame_idx: number;
}

export interface LatLonObj {
  lat: number;
  lon: number;
}

export interface FrameDoc {
  trip_id: string;
  frame_idx: number;
  timestamp: number;
  location: LatLonObj;
  speed: number;
  actual: string;
  scores: Record<string, number[]>;
  predicted: Record<string, string>;
  correct: Record<string, boolean>;
  perplexity: Record<string, number>;
  segment_id: string | null;
  region_id: string | null;
}

export interface QueryResponse {
  total: number;
  page: number;
  page_size: number;
  ids: FrameId[];
  docs: FrameDoc[];
}

export interface GroupStats {
  count: number;
  accuracy: number | null;
  mean_perplexity: number | null;
}

export interface AggregateReport {
  group_key: string;
  per_model: Record<string, GroupStats>;
  combined: GroupStats;
}

export interface AggregateResponse {
  key: string;
  reports: AggregateReport[];
}

export interface CombinationRow {
  pattern: Record<string, boolean>;
  count: number;
}

export interface CombinationTable {
  models: string[];
  rows: CombinationRow[];
  total: number;
}

export interface HistogramRow {
  label: string;
  count: number;
}

export interface HistogramResponse {
  dimension: string;
  items: string;
  rows: HistogramRow[];
}

export interface BBoxObj {
  min_lat: number;
  min_lon: number;
  max_lat: number;
  max_lon: number;
}

export interface DensityRaster {
  bbox: BBoxObj;
  width: number;
  height: number;
  bandwidth_m: number;
  values: number[];
}

export interface ThumbnailsResponse {
  frames: FrameId[];
  image_urls: string[];
  docs: FrameDoc[];
  skipped_missing: number;
}

export interface Timeline {
  trip_id: string;
  frame_count: number;
  frame_idx: number[];
  timestamp: number[];
  location: LatLonObj[];
  speed: number[];
  actual: string[];
  predicted: Record<string, string[]>;
  perplexity: Record<string, number[]>;
  scores: Record<string, number[][]>;
}

export interface Manifest {
  models: string[];
  counts: Record<string, number>;
  created_at: string;
  schema_version: number;
}

export interface TripAggregates {
  accuracy: number;
  mean_perplexity: number;
}

export interface TripSelectResponse {
  trip_ids: string[];
  aggregates: Record<string, Record<string, TripAggregates>>;
}

export interface GeoJsonFeature {
  type: "Feature";
  properties: Record<string, string>;
  geometry: {
    type: string;
    coordinates: unknown;
  };
}

export interface GeoJsonCollection {
  type: "FeatureCollection";
  features: GeoJsonFeature[];
}
