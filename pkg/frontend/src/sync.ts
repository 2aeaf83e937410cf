/** Keeps the drill-down widgets in lockstep with the timeline slider. */
import { Timeline } from "./types.js";

export interface SliderSync {
  frameIdx: number;
  lat: number;
  lon: number;
  speed: number;
  actual: string;
  predicted: Record<string, string>;
  perplexity: Record<string, number>;
  scores: Record<string, number[]>;
  imageUrl: string;
}

/** Everything the map marker, readouts, and frame image need at one
 * slider position; idx clamps into the timeline's range. */
export function sliderSync(timeline: Timeline, idx: number, apiBase: string): SliderSync {
  const clamped = Math.min(Math.max(idx, 0), timeline.frame_count - 1);
  const predicted: Record<string, string> = {};
  const perplexity: Record<string, number> = {};
  const scores: Record<string, number[]> = {};
  for (const model of Object.keys(timeline.predicted)) {
    predicted[model] = timeline.predicted[model][clamped];
    perplexity[model] = timeline.perplexity[model][clamped];
    scores[model] = timeline.scores[model][clamped];
  }
  const frameIdx = timeline.frame_idx[clamped];
  return {
    frameIdx,
    lat: timeline.location[clamped].lat,
    lon: timeline.location[clamped].lon,
    speed: timeline.speed[clamped],
    actual: timeline.actual[clamped],
    predicted,
    perplexity,
    scores,
    imageUrl: `${apiBase}/frames/${timeline.trip_id}/${frameIdx}/image`,
  };
}
