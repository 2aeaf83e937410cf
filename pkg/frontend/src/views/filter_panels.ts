/** Spatial-condition checkboxes, model-metric threshold controls, layer
 * toggles, and the accuracy/perplexity distribution charts of the current
 * selection. Changing anything re-issues the coordinated queries.
 */
import { clear, el, svgEl } from "../dom.js";
import {
  MetricFilter,
  STREET_TYPE_VALUES,
  TIME_OF_DAY_VALUES,
  WEATHER_VALUES,
} from "../query.js";
import { AppState, MapLayers } from "../state.js";
import { HistogramResponse } from "../types.js";

export interface FilterHandlers {
  onToggleCondition(dim: "timeOfDay" | "weather" | "streetType", value: string): void;
  onMetricFilter(filter: MetricFilter | null): void;
  onBinPick(metric: "accuracy" | "perplexity", label: string): void;
  onToggleLayer(layer: keyof MapLayers): void;
  onChoropleth(metric: "count" | "accuracy" | "perplexity", model: string | null): void;
  onStartDraw(): void;
  onClearPolygon(): void;
  onClearAll(): void;
}

const DIMS: Array<["timeOfDay" | "weather" | "streetType", string, string[]]> = [
  ["timeOfDay", "Time of day", TIME_OF_DAY_VALUES],
  ["weather", "Weather", WEATHER_VALUES],
  ["streetType", "Street type", STREET_TYPE_VALUES],
];

function checkboxGroup(
  state: AppState,
  dim: "timeOfDay" | "weather" | "streetType",
  title: string,
  values: string[],
  handlers: FilterHandlers,
): HTMLElement {
  const group = el("fieldset", { class: "filter-group", "data-dim": dim });
  group.append(el("legend", {}, [title]));
  for (const value of values) {
    const input = el("input", {
      type: "checkbox",
      value,
      "data-dim": dim,
      "data-value": value,
    }) as HTMLInputElement;
    input.checked = state.filters[dim].includes(value);
    input.addEventListener("change", () => handlers.onToggleCondition(dim, value));
    group.append(el("label", { class: "check" }, [input, value.replace("_", " ")]));
  }
  return group;
}

function metricControls(state: AppState, handlers: FilterHandlers): HTMLElement {
  const box = el("fieldset", { class: "filter-group metric-filter" });
  box.append(el("legend", {}, ["Model metrics"]));
  const models = state.manifest?.models ?? [];
  const current = state.filters.metric;

  const metricSel = el("select", { "data-testid": "metric-name" }) as HTMLSelectElement;
  for (const name of ["accuracy", "perplexity"]) {
    metricSel.append(el("option", { value: name }, [name]));
  }
  metricSel.value = current?.metric ?? "accuracy";

  const opSel = el("select", { "data-testid": "metric-op" }) as HTMLSelectElement;
  for (const [value, label] of [["<", "below"], [">=", "at least"]] as const) {
    opSel.append(el("option", { value }, [label]));
  }
  opSel.value = current?.op ?? "<";

  const slider = el("input", {
    type: "range",
    min: "0",
    max: "10",
    step: "1",
    "data-testid": "metric-threshold",
  }) as HTMLInputElement;
  const initialStep = current
    ? current.metric === "accuracy"
      ? Math.round(current.threshold * 10)
      : Math.round(((current.threshold - 1) / 3) * 10)
    : 5;
  slider.value = String(initialStep);
  const readout = el("span", { class: "threshold-readout" });

  const describe = () => {
    const step = Number(slider.value);
    if (metricSel.value === "accuracy") readout.textContent = `${step * 10}%`;
    else readout.textContent = (1 + step * 0.3).toFixed(1);
  };
  describe();
  slider.addEventListener("input", describe);
  metricSel.addEventListener("change", describe);

  const apply = el("button", { "data-testid": "metric-apply" }, ["Apply"]);
  apply.addEventListener("click", () => {
    const step = Number(slider.value);
    const metric = metricSel.value as "accuracy" | "perplexity";
    handlers.onMetricFilter({
      models,
      metric,
      op: opSel.value as "<" | ">=",
      threshold: metric === "accuracy" ? step / 10 : 1 + step * 0.3,
    });
  });
  const clearBtn = el("button", { "data-testid": "metric-clear" }, ["Clear"]);
  clearBtn.addEventListener("click", () => handlers.onMetricFilter(null));

  box.append(
    el("div", { class: "metric-row" }, [metricSel, opSel, slider, readout]),
    el("div", { class: "metric-row" }, [apply, clearBtn]),
  );
  if (current) {
    box.append(
      el("div", { class: "active-filter", "data-testid": "metric-active" }, [
        `${current.metric} ${current.op} ${current.threshold.toFixed(2)} (all models)`,
      ]),
    );
  }
  return box;
}

function histogramChart(
  title: string,
  metric: "accuracy" | "perplexity",
  data: HistogramResponse | undefined,
  handlers: FilterHandlers,
): HTMLElement {
  const box = el("div", { class: "hist", "data-testid": `hist-${metric}` });
  box.append(el("h4", {}, [title]));
  if (!data) {
    box.append(el("p", { class: "placeholder" }, ["loading"]));
    return box;
  }
  const width = 220;
  const height = 72;
  const peak = Math.max(...data.rows.map((r) => r.count), 1);
  const bar = width / data.rows.length;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
  });
  data.rows.forEach((row, i) => {
    const h = (row.count / peak) * (height - 14);
    const rect = svgEl("rect", {
      x: (i * bar + 1).toFixed(1),
      y: (height - 12 - h).toFixed(1),
      width: (bar - 2).toFixed(1),
      height: h.toFixed(1),
      fill: "#60a5fa",
      class: "hist-bar",
      "data-label": row.label,
    });
    rect.append(svgEl("title", {}, [`${row.label}: ${row.count} trips`]));
    rect.addEventListener("click", () => handlers.onBinPick(metric, row.label));
    svg.append(rect);
  });
  box.append(svg);
  return box;
}

export function renderFilterPanels(
  container: HTMLElement,
  state: AppState,
  handlers: FilterHandlers,
): void {
  clear(container);
  container.append(el("h3", {}, ["Spatial conditions"]));
  for (const [dim, title, values] of DIMS) {
    container.append(checkboxGroup(state, dim, title, values, handlers));
  }
  container.append(metricControls(state, handlers));

  container.append(
    histogramChart("Trip accuracy", "accuracy", state.responses.histAccuracy, handlers),
    histogramChart("Trip perplexity", "perplexity", state.responses.histPerplexity, handlers),
  );

  const layers = el("fieldset", { class: "filter-group" });
  layers.append(el("legend", {}, ["Map layers"]));
  for (const layer of ["choropleth", "density", "points"] as const) {
    const input = el("input", {
      type: "checkbox",
      "data-layer": layer,
    }) as HTMLInputElement;
    input.checked = state.layers[layer];
    input.addEventListener("change", () => handlers.onToggleLayer(layer));
    layers.append(el("label", { class: "check" }, [input, layer]));
  }
  container.append(layers);

  const choropleth = el("fieldset", { class: "filter-group" });
  choropleth.append(el("legend", {}, ["Region color"]));
  const metricSel = el("select", { "data-testid": "choropleth-metric" }) as HTMLSelectElement;
  for (const name of ["count", "accuracy", "perplexity"]) {
    metricSel.append(el("option", { value: name }, [name]));
  }
  metricSel.value = state.choropleth.metric;
  const modelSel = el("select", { "data-testid": "choropleth-model" }) as HTMLSelectElement;
  modelSel.append(el("option", { value: "" }, ["all models"]));
  for (const m of state.manifest?.models ?? []) {
    modelSel.append(el("option", { value: m }, [m]));
  }
  modelSel.value = state.choropleth.model ?? "";
  const onChange = () =>
    handlers.onChoropleth(
      metricSel.value as "count" | "accuracy" | "perplexity",
      modelSel.value || null,
    );
  metricSel.addEventListener("change", onChange);
  modelSel.addEventListener("change", onChange);
  choropleth.append(metricSel, modelSel);
  container.append(choropleth);

  const draw = el("div", { class: "draw-controls" });
  const drawBtn = el("button", { "data-testid": "draw-region" }, [
    state.drawing ? "Click map, double-click to finish" : "Draw region",
  ]);
  drawBtn.addEventListener("click", () => handlers.onStartDraw());
  const clearPoly = el("button", {}, ["Clear region"]);
  clearPoly.addEventListener("click", () => handlers.onClearPolygon());
  const clearAll = el("button", { "data-testid": "clear-all" }, ["Reset filters"]);
  clearAll.addEventListener("click", () => handlers.onClearAll());
  draw.append(drawBtn, clearPoly, clearAll);
  container.append(draw);
}
