/** Interactive map: region choropleth, KDE raster, critical-location
 * points, trip marker, and polygon-draw selection. All values shown are
 * server responses; this view only positions and colors them.
 */
import { choroplethColor, densityColor } from "../color.js";
import { clear, el, svgEl } from "../dom.js";
import { regionsBBox } from "../effects.js";
import { MapTransform, fitBounds, tileUrl, tilesForBBox, zoomForBBox } from "../projection.js";
import { AppState, ChoroplethMetric } from "../state.js";
import { sliderSync } from "../sync.js";
import { AggregateReport, GeoJsonFeature } from "../types.js";

export const MAP_WIDTH = 660;
export const MAP_HEIGHT = 540;

export interface MapHandlers {
  onDraftVertex(vertex: [number, number]): void;
  onPolygonDone(): void;
  apiBase: string;
  tileTemplate: string | null;
}

function metricValue(
  report: AggregateReport | undefined,
  metric: ChoroplethMetric,
  model: string | null,
): number | null {
  if (!report) return null;
  const stats = model ? report.per_model[model] : report.combined;
  if (!stats) return null;
  if (metric === "count") return stats.count;
  if (metric === "accuracy") return stats.accuracy;
  return stats.mean_perplexity;
}

function featureRings(feature: GeoJsonFeature): number[][][] {
  const geometry = feature.geometry;
  if (geometry.type === "Polygon") return geometry.coordinates as number[][][];
  const polys = geometry.coordinates as number[][][][];
  return polys.flat();
}

function ringPath(ring: number[][], t: MapTransform): string {
  return (
    ring
      .map(([lon, lat], i) => {
        const [x, y] = t.toXY(lat, lon);
        return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ") + " Z"
  );
}

export function renderMap(container: HTMLElement, state: AppState, handlers: MapHandlers): void {
  clear(container);
  const bbox = regionsBBox(state);
  if (!bbox) {
    container.append(el("p", { class: "placeholder" }, ["no geometry loaded"]));
    return;
  }
  const t = fitBounds(bbox, MAP_WIDTH, MAP_HEIGHT);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`,
    width: String(MAP_WIDTH),
    height: String(MAP_HEIGHT),
    class: "map-svg",
    "data-testid": "map",
  });

  // optional slippy basemap; blank when no tile template is configured
  if (handlers.tileTemplate) {
    const z = zoomForBBox(bbox, MAP_WIDTH);
    const tilesGroup = svgEl("g", { class: "layer-tiles" });
    for (const ref of tilesForBBox(bbox, z)) {
      const n = 2 ** ref.z;
      const lonW = (ref.x / n) * 360 - 180;
      const lonE = ((ref.x + 1) / n) * 360 - 180;
      const latN = (Math.atan(Math.sinh(Math.PI * (1 - (2 * ref.y) / n))) * 180) / Math.PI;
      const latS = (Math.atan(Math.sinh(Math.PI * (1 - (2 * (ref.y + 1)) / n))) * 180) / Math.PI;
      const [x0, y0] = t.toXY(latN, lonW);
      const [x1, y1] = t.toXY(latS, lonE);
      const img = svgEl("image", {
        href: tileUrl(handlers.tileTemplate, ref),
        x: x0.toFixed(1),
        y: y0.toFixed(1),
        width: (x1 - x0).toFixed(1),
        height: (y1 - y0).toFixed(1),
        preserveAspectRatio: "none",
      });
      tilesGroup.append(img);
    }
    svg.append(tilesGroup);
  }

  // region choropleth
  const regionsGroup = svgEl("g", { class: "layer-regions" });
  if (state.regions && state.layers.choropleth) {
    const reports = new Map(
      (state.responses.aggregate?.reports ?? []).map((r) => [r.group_key, r]),
    );
    const values = new Map<string, number | null>();
    for (const feature of state.regions.features) {
      const rid = feature.properties.region_id;
      values.set(
        rid,
        metricValue(reports.get(rid), state.choropleth.metric, state.choropleth.model),
      );
    }
    const present = [...values.values()].filter((v): v is number => v !== null);
    const lo = present.length ? Math.min(...present) : 0;
    const hi = present.length ? Math.max(...present) : 1;
    const span = hi - lo || 1;
    for (const feature of state.regions.features) {
      const rid = feature.properties.region_id;
      const value = values.get(rid) ?? null;
      const fill = value === null ? "#f4f4f4" : choroplethColor((value - lo) / span);
      const d = featureRings(feature).map((ring) => ringPath(ring, t)).join(" ");
      const path = svgEl("path", {
        d,
        class: "region",
        "data-region": rid,
        fill,
        "fill-rule": "evenodd",
        stroke: "#666",
        "stroke-width": "1",
      });
      path.append(
        svgEl("title", {}, [
          value === null ? `${rid}: no data` : `${rid}: ${value.toFixed(4)}`,
        ]),
      );
      regionsGroup.append(path);
    }
  }
  svg.append(regionsGroup);

  // street polylines, faint context
  if (state.streets) {
    const streetsGroup = svgEl("g", { class: "layer-streets" });
    for (const feature of state.streets.features) {
      const coords = feature.geometry.coordinates as number[][];
      const d = coords
        .map(([lon, lat], i) => {
          const [x, y] = t.toXY(lat, lon);
          return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
        })
        .join(" ");
      streetsGroup.append(
        svgEl("path", { d, stroke: "#bbb", "stroke-width": "1", fill: "none" }),
      );
    }
    svg.append(streetsGroup);
  }

  // KDE raster layer
  if (state.layers.density && state.responses.density) {
    const raster = state.responses.density;
    const peak = Math.max(...raster.values, 0);
    const group = svgEl("g", { class: "layer-density", opacity: "0.55" });
    if (peak > 0) {
      const dlat = (raster.bbox.max_lat - raster.bbox.min_lat) / raster.height;
      const dlon = (raster.bbox.max_lon - raster.bbox.min_lon) / raster.width;
      for (let row = 0; row < raster.height; row++) {
        for (let col = 0; col < raster.width; col++) {
          const v = raster.values[row * raster.width + col];
          if (v <= peak * 1e-3) continue;
          const latN = raster.bbox.max_lat - row * dlat;
          const lonW = raster.bbox.min_lon + col * dlon;
          const [x0, y0] = t.toXY(latN, lonW);
          const [x1, y1] = t.toXY(latN - dlat, lonW + dlon);
          group.append(
            svgEl("rect", {
              x: x0.toFixed(1),
              y: y0.toFixed(1),
              width: Math.max(x1 - x0, 0.5).toFixed(1),
              height: Math.max(y1 - y0, 0.5).toFixed(1),
              fill: densityColor(v / peak),
              class: "density-cell",
            }),
          );
        }
      }
    }
    svg.append(group);
  }

  // critical-location points from the active query
  if (state.layers.points && state.responses.query) {
    const group = svgEl("g", { class: "layer-points" });
    for (const doc of state.responses.query.docs) {
      const [x, y] = t.toXY(doc.location.lat, doc.location.lon);
      const dot = svgEl("circle", {
        cx: x.toFixed(1),
        cy: y.toFixed(1),
        r: "2.5",
        class: "point",
        fill: "#1d4ed8",
        "fill-opacity": "0.75",
        "data-frame": `${doc.trip_id}:${doc.frame_idx}`,
      });
      dot.append(svgEl("title", {}, [`${doc.trip_id} #${doc.frame_idx}`]));
      group.append(dot);
    }
    svg.append(group);
  }

  // focused frame (thumbnail click)
  if (state.focusFrame && state.responses.query) {
    const doc = state.responses.query.docs.find(
      (d) =>
        d.trip_id === state.focusFrame!.trip_id &&
        d.frame_idx === state.focusFrame!.frame_idx,
    );
    if (doc) {
      const [x, y] = t.toXY(doc.location.lat, doc.location.lon);
      svg.append(
        svgEl("circle", {
          cx: x.toFixed(1),
          cy: y.toFixed(1),
          r: "7",
          class: "focus-ring",
          fill: "none",
          stroke: "#dc2626",
          "stroke-width": "2.5",
        }),
      );
    }
  }

  // trip marker synced with the timeline slider
  if (state.selectedTrip && state.responses.timeline?.trip_id === state.selectedTrip) {
    const synced = sliderSync(state.responses.timeline, state.sliderIdx, handlers.apiBase);
    const [x, y] = t.toXY(synced.lat, synced.lon);
    svg.append(
      svgEl("circle", {
        cx: x.toFixed(1),
        cy: y.toFixed(1),
        r: "6",
        class: "trip-marker",
        fill: "#f59e0b",
        stroke: "#7c2d12",
        "stroke-width": "2",
        "data-frame-idx": String(synced.frameIdx),
      }),
    );
  }

  // polygon draw overlay
  if (state.draftPolygon.length) {
    const pts = state.draftPolygon
      .map(([lat, lon]) => t.toXY(lat, lon).map((v) => v.toFixed(1)).join(","))
      .join(" ");
    svg.append(
      svgEl("polyline", {
        points: pts,
        class: "draft-polygon",
        fill: "rgba(220,38,38,0.15)",
        stroke: "#dc2626",
        "stroke-width": "1.5",
        "stroke-dasharray": "4 3",
      }),
    );
  }
  if (state.filters.polygon) {
    const pts = state.filters.polygon
      .map(([lat, lon]) => t.toXY(lat, lon).map((v) => v.toFixed(1)).join(","))
      .join(" ");
    svg.append(
      svgEl("polygon", {
        points: pts,
        class: "query-polygon",
        fill: "rgba(220,38,38,0.08)",
        stroke: "#dc2626",
        "stroke-width": "2",
      }),
    );
  }

  if (state.drawing) {
    svg.addEventListener("click", (event) => {
      const rect = svg.getBoundingClientRect();
      const [lat, lon] = t.toLatLon(event.clientX - rect.left, event.clientY - rect.top);
      handlers.onDraftVertex([lat, lon]);
    });
    svg.addEventListener("dblclick", () => handlers.onPolygonDone());
  }

  container.append(svg);
  const count = state.responses.query?.total ?? 0;
  container.append(
    el("div", { class: "map-status", "data-testid": "map-status" }, [
      `${count} matching locations`,
    ]),
  );
}
