/** Trip drill-down: trip list with server aggregates, per-model perplexity
 * timelines with action strips, and a slider that drives the map marker,
 * readouts, and the current frame image in lockstep. Clicking a model
 * readout opens the full score-vector popup.
 */
import { ACTION_ICON_PATHS, ACTUAL_COLOR, modelColor } from "../color.js";
import { actionIcon, clear, el, svgEl } from "../dom.js";
import { AppState } from "../state.js";
import { sliderSync } from "../sync.js";
import { Timeline } from "../types.js";

export interface DrilldownHandlers {
  onSelectTrip(tripId: string | null): void;
  onSlider(idx: number): void;
  apiBase: string;
}

const CHART_W = 420;
const CHART_H = 46;
const PERPLEXITY_MIN = 1;
const PERPLEXITY_MAX = 4;

function tripList(state: AppState, handlers: DrilldownHandlers): HTMLElement {
  const box = el("div", { class: "trip-list", "data-testid": "trip-list" });
  const select = state.responses.tripSelect;
  if (!select) {
    box.append(el("p", { class: "placeholder" }, ["loading"]));
    return box;
  }
  const inQuery = new Set(
    (state.responses.query?.ids ?? []).map((id) => id.trip_id),
  );
  const visible = select.trip_ids.filter((t) => !inQuery.size || inQuery.has(t));
  const models = state.manifest?.models ?? [];
  const table = el("table", { class: "trips" });
  const head = el("tr", {}, [el("th", {}, ["trip"])]);
  for (const m of models) head.append(el("th", {}, [`${m} acc / perp`]));
  table.append(head);
  for (const tripId of visible.slice(0, 40)) {
    const tr = el("tr", { class: "trip-row", "data-trip": tripId });
    if (tripId === state.selectedTrip) tr.classList.add("selected");
    tr.append(el("td", {}, [tripId]));
    const agg = select.aggregates[tripId];
    for (const m of models) {
      const cell = agg?.[m];
      tr.append(
        el("td", {}, [
          cell ? `${(cell.accuracy * 100).toFixed(0)}% / ${cell.mean_perplexity.toFixed(2)}` : "-",
        ]),
      );
    }
    tr.addEventListener("click", () =>
      handlers.onSelectTrip(tripId === state.selectedTrip ? null : tripId),
    );
    table.append(tr);
  }
  box.append(table);
  return box;
}

function perplexityLine(values: number[], color: string): SVGElement {
  const n = values.length;
  const points = values
    .map((v, i) => {
      const x = (i / Math.max(n - 1, 1)) * CHART_W;
      const t = (v - PERPLEXITY_MIN) / (PERPLEXITY_MAX - PERPLEXITY_MIN);
      const y = CHART_H - Math.min(Math.max(t, 0), 1) * CHART_H;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  return svgEl("polyline", {
    points,
    fill: "none",
    stroke: color,
    "stroke-width": "1.5",
    class: "perplexity-line",
  });
}

function actionStrip(actions: string[], color: string): HTMLElement {
  const strip = el("div", { class: "action-strip" });
  const step = Math.max(1, Math.floor(actions.length / 24));
  for (let i = 0; i < actions.length; i += step) {
    strip.append(actionIcon(ACTION_ICON_PATHS[actions[i]], color, `#${i}: ${actions[i]}`));
  }
  return strip;
}

function timelineRows(
  timeline: Timeline,
  models: string[],
  state: AppState,
  handlers: DrilldownHandlers,
): HTMLElement {
  const box = el("div", { class: "timeline-rows", "data-testid": "timeline" });

  const rows: Array<[string, string, string[], number[] | null]> = [
    ["actual", ACTUAL_COLOR, timeline.actual, null],
  ];
  for (const m of models) {
    rows.push([m, modelColor(m, models), timeline.predicted[m], timeline.perplexity[m]]);
  }
  const cursorX =
    (state.sliderIdx / Math.max(timeline.frame_count - 1, 1)) * CHART_W;
  for (const [label, color, actions, perplexity] of rows) {
    const row = el("div", { class: "timeline-row" });
    const name = el("span", { class: "row-label" }, [label]);
    if (perplexity) {
      name.classList.add("clickable");
      name.addEventListener("click", () => {
        const popup = box.querySelector(".score-popup");
        popup?.remove();
        box.append(scorePopup(timeline, label, state, handlers));
      });
    }
    row.append(name);
    const svg = svgEl("svg", {
      viewBox: `0 0 ${CHART_W} ${CHART_H}`,
      width: String(CHART_W),
      height: String(CHART_H),
      class: "timeline-chart",
    });
    if (perplexity) svg.append(perplexityLine(perplexity, color));
    svg.append(
      svgEl("line", {
        x1: cursorX.toFixed(1),
        y1: "0",
        x2: cursorX.toFixed(1),
        y2: String(CHART_H),
        stroke: "#9ca3af",
        "stroke-dasharray": "3 2",
        class: "timeline-cursor",
      }),
    );
    row.append(svg);
    row.append(actionStrip(actions, color));
    box.append(row);
  }
  return box;
}

function scorePopup(
  timeline: Timeline,
  model: string,
  state: AppState,
  handlers: DrilldownHandlers,
): HTMLElement {
  const synced = sliderSync(timeline, state.sliderIdx, handlers.apiBase);
  const popup = el("div", { class: "score-popup", "data-testid": "score-popup" });
  popup.append(el("h4", {}, [`${model} scores @ frame ${synced.frameIdx}`]));
  const actions = ["go_straight", "slow_stop", "turn_left", "turn_right"];
  const list = el("ul", {});
  synced.scores[model].forEach((score, i) => {
    list.append(el("li", {}, [`${actions[i]}: ${score.toFixed(4)}`]));
  });
  popup.append(list);
  const close = el("button", {}, ["close"]);
  close.addEventListener("click", () => popup.remove());
  popup.append(close);
  return popup;
}

export function renderTripDrilldown(
  container: HTMLElement,
  state: AppState,
  handlers: DrilldownHandlers,
): void {
  clear(container);
  container.append(el("h3", {}, ["Trip drill-down"]));
  container.append(tripList(state, handlers));

  const timeline = state.responses.timeline;
  if (!state.selectedTrip || !timeline || timeline.trip_id !== state.selectedTrip) {
    container.append(el("p", { class: "placeholder" }, ["select a trip to see its timeline"]));
    return;
  }
  const models = state.manifest?.models ?? [];
  const synced = sliderSync(timeline, state.sliderIdx, handlers.apiBase);

  const slider = el("input", {
    type: "range",
    min: "0",
    max: String(timeline.frame_count - 1),
    step: "1",
    class: "timeline-slider",
    "data-testid": "timeline-slider",
  }) as HTMLInputElement;
  slider.value = String(state.sliderIdx);
  slider.addEventListener("input", () => handlers.onSlider(Number(slider.value)));
  container.append(slider);

  const frame = el("div", { class: "frame-panel" });
  const image = el("img", {
    src: synced.imageUrl,
    alt: `frame ${synced.frameIdx}`,
    class: "frame-image",
    "data-testid": "frame-image",
    width: "128",
    height: "128",
  });
  // frame images may be stored sparsely; show a quiet placeholder then
  image.addEventListener("error", () => image.classList.add("missing"));
  frame.append(image);
  const readout = el("div", { class: "frame-readout", "data-testid": "frame-readout" });
  readout.append(
    el("div", {}, [`frame ${synced.frameIdx} - speed ${synced.speed.toFixed(2)} m/s`]),
    el("div", {}, [`actual: ${synced.actual}`]),
  );
  for (const m of models) {
    readout.append(
      el("div", { class: "model-readout", "data-model": m }, [
        `${m}: ${synced.predicted[m]} (perplexity ${synced.perplexity[m].toFixed(3)})`,
      ]),
    );
  }
  frame.append(readout);
  container.append(frame);

  container.append(timelineRows(timeline, models, state, handlers));
}
