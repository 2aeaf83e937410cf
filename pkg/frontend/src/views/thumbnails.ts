/** Street-view thumbnails of the most different frames in the selection.
 * Each image carries four driving-action icons: black for the actual
 * action, then one per model in its canonical color. Clicking an image
 * focuses the map on that frame.
 */
import { ACTION_ICON_PATHS, ACTUAL_COLOR, modelColor } from "../color.js";
import { actionIcon, clear, el } from "../dom.js";
import { AppState } from "../state.js";
import { FrameDoc } from "../types.js";

export interface ThumbnailHandlers {
  onFocusFrame(frame: { trip_id: string; frame_idx: number }): void;
  apiBase: string;
}

function iconStrip(doc: FrameDoc, models: string[]): HTMLElement {
  const strip = el("div", { class: "icon-strip" });
  strip.append(
    actionIcon(ACTION_ICON_PATHS[doc.actual], ACTUAL_COLOR, `actual: ${doc.actual}`),
  );
  for (const m of models) {
    const predicted = doc.predicted[m];
    strip.append(
      actionIcon(ACTION_ICON_PATHS[predicted], modelColor(m, models), `${m}: ${predicted}`),
    );
  }
  return strip;
}

export function renderThumbnails(
  container: HTMLElement,
  state: AppState,
  handlers: ThumbnailHandlers,
): void {
  clear(container);
  container.append(el("h3", {}, ["Street view thumbnails"]));
  const response = state.responses.thumbnails;
  if (!response) {
    container.append(el("p", { class: "placeholder" }, ["loading"]));
    return;
  }
  const models = state.manifest?.models ?? [];
  const docsByKey = new Map<string, FrameDoc>();
  for (const doc of response.docs) {
    docsByKey.set(`${doc.trip_id}:${doc.frame_idx}`, doc);
  }
  const grid = el("div", { class: "thumb-grid", "data-testid": "thumbnails" });
  response.frames.forEach((frame, i) => {
    const figure = el("figure", {
      class: "thumb",
      "data-frame": `${frame.trip_id}:${frame.frame_idx}`,
    });
    const img = el("img", {
      src: handlers.apiBase + response.image_urls[i].replace(handlers.apiBase, ""),
      alt: `${frame.trip_id} frame ${frame.frame_idx}`,
      width: "96",
      height: "96",
    });
    figure.append(img);
    const doc = docsByKey.get(`${frame.trip_id}:${frame.frame_idx}`);
    if (doc) figure.append(iconStrip(doc, models));
    figure.append(el("figcaption", {}, [`${frame.trip_id} #${frame.frame_idx}`]));
    figure.addEventListener("click", () => handlers.onFocusFrame(frame));
    grid.append(figure);
  });
  container.append(grid);
  if (response.skipped_missing > 0) {
    container.append(
      el("p", { class: "note" }, [`${response.skipped_missing} frames had no image`]),
    );
  }
}
