/** Model prediction filter: one row per correctness combination with its
 * server-side count. Selecting a row applies the matching
 * correctness-pattern predicate, which puts the row's locations on the map.
 */
import { ACTUAL_COLOR, modelColor } from "../color.js";
import { clear, el, svgEl } from "../dom.js";
import { AppState } from "../state.js";

export interface MatrixHandlers {
  onSelectPattern(pattern: Record<string, boolean> | null): void;
}

function dot(color: string, filled: boolean): SVGElement {
  const icon = svgEl("svg", { viewBox: "0 0 14 14", width: "14", height: "14" });
  icon.append(
    svgEl("circle", {
      cx: "7",
      cy: "7",
      r: "5",
      fill: filled ? color : "none",
      stroke: color,
      "stroke-width": "2",
    }),
  );
  return icon;
}

function samePattern(a: Record<string, boolean> | null, b: Record<string, boolean>): boolean {
  if (!a) return false;
  const ak = Object.keys(a).sort();
  const bk = Object.keys(b).sort();
  return ak.length === bk.length && ak.every((k, i) => k === bk[i] && a[k] === b[k]);
}

export function renderPredictionMatrix(
  container: HTMLElement,
  state: AppState,
  handlers: MatrixHandlers,
): void {
  clear(container);
  container.append(el("h3", {}, ["Model predictions"]));
  const table = state.responses.combinations;
  if (!table) {
    container.append(el("p", { class: "placeholder" }, ["loading"]));
    return;
  }
  const models = table.models;
  const grid = el("table", { class: "matrix", "data-testid": "combination-table" });
  const head = el("tr", {}, [el("th", {}, ["actual"])]);
  for (const m of models) head.append(el("th", {}, [m]));
  head.append(el("th", { class: "count-col" }, ["count"]));
  grid.append(head);

  // most populous combinations first, mirroring the reading order of the view
  const rows = [...table.rows].sort((a, b) => b.count - a.count);
  for (const row of rows) {
    const tr = el("tr", { class: "matrix-row", "data-count": String(row.count) });
    if (samePattern(state.filters.pattern, row.pattern)) tr.classList.add("selected");
    tr.append(el("td", {}, [dot(ACTUAL_COLOR, true)]));
    for (const m of models) {
      tr.append(el("td", {}, [dot(modelColor(m, models), row.pattern[m])]));
    }
    tr.append(el("td", { class: "count-col" }, [row.count.toLocaleString()]));
    tr.addEventListener("click", () => {
      handlers.onSelectPattern(
        samePattern(state.filters.pattern, row.pattern) ? null : row.pattern,
      );
    });
    grid.append(tr);
  }
  container.append(grid);
  container.append(
    el("div", { class: "matrix-total", "data-testid": "matrix-total" }, [
      `${table.total.toLocaleString()} predictions in selection`,
    ]),
  );
}
