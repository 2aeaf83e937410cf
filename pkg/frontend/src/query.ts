/** Builds server query expressions from the UI's filter state.
 *
 * All analytics numbers come from the server; this module only composes
 * the JSON expression tree ({"and": ...}/{"or": ...}/{"pred": ...}).
 */

export type QueryNode =
  | { and: QueryNode[] }
  | { or: QueryNode[] }
  | { pred: Record<string, unknown> };

export interface MetricFilter {
  models: string[];
  metric: "accuracy" | "perplexity";
  op: "<" | ">=";
  /** accuracy in [0,1], perplexity in [1,4]; steps of one bin (10%). */
  threshold: number;
}

/** Single-bin drill-down from a distribution-chart bar click. */
export interface BinFilter {
  metric: "accuracy" | "perplexity";
  model: string;
  bins: string[];
}

export interface FilterState {
  timeOfDay: string[];
  weather: string[];
  streetType: string[];
  metric: MetricFilter | null;
  binFilter: BinFilter | null;
  /** drawn polygon as [lat, lon] vertices, or null */
  polygon: Array<[number, number]> | null;
  /** combination-row selection: model -> required correctness */
  pattern: Record<string, boolean> | null;
}

export const TIME_OF_DAY_VALUES = ["day", "night", "dawn_dusk", "undefined"];
export const WEATHER_VALUES = [
  "clear",
  "overcast",
  "rainy",
  "snowy",
  "cloudy",
  "foggy",
  "undefined",
];
export const STREET_TYPE_VALUES = [
  "city_street",
  "highway",
  "residential",
  "tunnel",
  "parking",
  "gas_station",
  "undefined",
];

export const BIN_LABELS = Array.from({ length: 10 }, (_, i) => `${i * 10}-${i * 10 + 10}`);

/** Matches every frame; used when no filter is active but an expr is required. */
export const MATCH_ALL: QueryNode = { pred: { type: "correctness_pattern", pattern: {} } };

export function emptyFilters(): FilterState {
  return {
    timeOfDay: [],
    weather: [],
    streetType: [],
    metric: null,
    binFilter: null,
    polygon: null,
    pattern: null,
  };
}

/** Percent position of a metric threshold inside the ten-bin scale. */
function toPercent(metric: "accuracy" | "perplexity", threshold: number): number {
  if (metric === "accuracy") return threshold * 100;
  return ((threshold - 1) / 3) * 100;
}

/** Bin labels exactly covering metric < threshold (threshold on a bin edge). */
export function binsBelow(metric: "accuracy" | "perplexity", threshold: number): string[] {
  const p = Math.round(toPercent(metric, threshold));
  return BIN_LABELS.filter((label) => parseInt(label.split("-")[0], 10) < p);
}

/** Bin labels exactly covering metric >= threshold (threshold on a bin edge). */
export function binsAtLeast(metric: "accuracy" | "perplexity", threshold: number): string[] {
  const p = Math.round(toPercent(metric, threshold));
  return BIN_LABELS.filter((label) => parseInt(label.split("-")[0], 10) >= p);
}

function conditionPred(type: string, values: string[]): QueryNode {
  return { pred: { type, values } };
}

export function metricFilterNodes(filter: MetricFilter): QueryNode[] {
  const bins =
    filter.op === "<"
      ? binsBelow(filter.metric, filter.threshold)
      : binsAtLeast(filter.metric, filter.threshold);
  const type = filter.metric === "accuracy" ? "accuracy_bin" : "perplexity_bin";
  return filter.models.map((model) => ({ pred: { type, model, bins } }));
}

export function patternPredicate(pattern: Record<string, boolean>): QueryNode {
  return { pred: { type: "correctness_pattern", pattern } };
}

export function polygonPredicate(ring: Array<[number, number]>): QueryNode {
  return { pred: { type: "in_region_polygon", ring } };
}

/** Compose the active filters into one AND tree; null when nothing is active. */
export function buildQuery(f: FilterState): QueryNode | null {
  const clauses: QueryNode[] = [];
  if (f.timeOfDay.length) clauses.push(conditionPred("time_of_day", f.timeOfDay));
  if (f.weather.length) clauses.push(conditionPred("weather", f.weather));
  if (f.streetType.length) clauses.push(conditionPred("street_type", f.streetType));
  if (f.metric && f.metric.models.length) clauses.push(...metricFilterNodes(f.metric));
  if (f.binFilter && f.binFilter.bins.length) {
    const type = f.binFilter.metric === "accuracy" ? "accuracy_bin" : "perplexity_bin";
    clauses.push({ pred: { type, model: f.binFilter.model, bins: f.binFilter.bins } });
  }
  if (f.polygon && f.polygon.length >= 3) clauses.push(polygonPredicate(f.polygon));
  if (f.pattern && Object.keys(f.pattern).length) clauses.push(patternPredicate(f.pattern));
  if (!clauses.length) return null;
  if (clauses.length === 1) return clauses[0];
  return { and: clauses };
}
