/** Application bootstrap: load config + static data, wire the store,
 * request runner, and the five coordinated views.
 */
import { ApiClient } from "./api.js";
import { loadConfig } from "./config.js";
import { RequestRunner } from "./runner.js";
import {
  AppState,
  Store,
  addDraftVertex,
  clearFilters,
  finishPolygon,
  selectTrip,
  setBinFilter,
  setChoropleth,
  setFocusFrame,
  setMetricFilter,
  setPattern,
  setPolygon,
  setSlider,
  startDrawing,
  toggleCondition,
  toggleLayer,
} from "./state.js";
import { GeoJsonCollection, Manifest } from "./types.js";
import { renderFilterPanels } from "./views/filter_panels.js";
import { renderMap } from "./views/map_view.js";
import { renderPredictionMatrix } from "./views/prediction_matrix.js";
import { renderThumbnails } from "./views/thumbnails.js";
import { renderTripDrilldown } from "./views/trip_drilldown.js";

function required(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing container #${id}`);
  return node;
}

export async function boot(): Promise<void> {
  const config = await loadConfig();
  const api = new ApiClient(config.apiBaseUrl);
  const store = new Store();
  const runner = new RequestRunner(api, store);

  const containers = {
    filters: required("filters"),
    map: required("map"),
    matrix: required("matrix"),
    thumbs: required("thumbnails"),
    drilldown: required("drilldown"),
  };

  const render = (state: AppState) => {
    renderFilterPanels(containers.filters, state, {
      onToggleCondition: (dim, value) => store.update((s) => toggleCondition(s, dim, value)),
      onMetricFilter: (filter) => store.update((s) => setMetricFilter(s, filter)),
      onBinPick: (metric, label) =>
        store.update((s) => {
          const model = s.choropleth.model ?? s.manifest?.models[0];
          if (!model) return s;
          const current = s.filters.binFilter;
          const same =
            current && current.metric === metric && current.bins.length === 1 &&
            current.bins[0] === label;
          return setBinFilter(s, same ? null : { metric, model, bins: [label] });
        }),
      onToggleLayer: (layer) => store.update((s) => toggleLayer(s, layer)),
      onChoropleth: (metric, model) => store.update((s) => setChoropleth(s, metric, model)),
      onStartDraw: () => store.update(startDrawing),
      onClearPolygon: () => store.update((s) => setPolygon(s, null)),
      onClearAll: () => store.update(clearFilters),
    });
    renderMap(containers.map, state, {
      onDraftVertex: (v) => store.update((s) => addDraftVertex(s, v)),
      onPolygonDone: () => store.update(finishPolygon),
      apiBase: config.apiBaseUrl,
      tileTemplate: config.tileUrl,
    });
    renderPredictionMatrix(containers.matrix, state, {
      onSelectPattern: (pattern) => store.update((s) => setPattern(s, pattern)),
    });
    renderThumbnails(containers.thumbs, state, {
      onFocusFrame: (frame) => store.update((s) => setFocusFrame(s, frame)),
      apiBase: config.apiBaseUrl,
    });
    renderTripDrilldown(containers.drilldown, state, {
      onSelectTrip: (tripId) => store.update((s) => selectTrip(s, tripId)),
      onSlider: (idx) => store.update((s) => setSlider(s, idx)),
      apiBase: config.apiBaseUrl,
    });
  };

  store.subscribe((state) => {
    runner.sync(state);
    render(state);
  });

  const [manifest, regions, streets] = await Promise.all([
    api.get<Manifest>("manifest", "/manifest"),
    api.get<GeoJsonCollection>("geo-regions", "/geometry/regions"),
    api.get<GeoJsonCollection>("geo-streets", "/geometry/streets"),
  ]);
  store.update((s) => ({ ...s, manifest, regions, streets }));
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  boot().catch((err) => {
    console.error("failed to start:", err);
    const map = document.getElementById("map");
    if (map) map.textContent = `failed to start: ${err}`;
  });
}
