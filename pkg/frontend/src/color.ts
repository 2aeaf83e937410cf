/** Color assignments: the fixed per-model icon scheme, a documented
 * palette for additional models, and map ramps.
 */

export const ACTUAL_COLOR = "#000000";

/** Canonical model colors: TCNN1 red, CNN-LSTM blue, FCN-LSTM green. */
export const MODEL_COLORS: Record<string, string> = {
  tcnn1: "#d62728",
  cnn_lstm: "#1f77b4",
  fcn_lstm: "#2ca02c",
};

/** Additional models draw from this palette in model-list order. */
export const EXTRA_MODEL_PALETTE = [
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#e377c2",
  "#17becf",
  "#bcbd22",
];

export function modelColor(model: string, models: string[]): string {
  if (model in MODEL_COLORS) return MODEL_COLORS[model];
  const extras = models.filter((m) => !(m in MODEL_COLORS));
  const idx = extras.indexOf(model);
  return EXTRA_MODEL_PALETTE[(idx >= 0 ? idx : 0) % EXTRA_MODEL_PALETTE.length];
}

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function ramp(stops: Array<[number, number, number]>): (t: number) => string {
  return (t: number) => {
    const clamped = Math.min(Math.max(t, 0), 1);
    const pos = clamped * (stops.length - 1);
    const i = Math.min(Math.floor(pos), stops.length - 2);
    const f = pos - i;
    const [r0, g0, b0] = stops[i];
    const [r1, g1, b1] = stops[i + 1];
    const r = Math.round(lerp(r0, r1, f));
    const g = Math.round(lerp(g0, g1, f));
    const b = Math.round(lerp(b0, b1, f));
    return `rgb(${r},${g},${b})`;
  };
}

/** Sequential ramp for the region choropleth (light to dark violet-blue). */
export const choroplethColor = ramp([
  [247, 251, 255],
  [198, 219, 239],
  [107, 174, 214],
  [49, 130, 189],
  [8, 81, 156],
]);

/** Perceptually even ramp for the KDE layer (viridis control points). */
export const densityColor = ramp([
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
]);

/** SVG path data for the four driving-action icons (16x16 box). */
export const ACTION_ICON_PATHS: Record<string, string> = {
  go_straight: "M8 14 L8 4 M5 7 L8 3 L11 7",
  slow_stop: "M4 4 H12 V12 H4 Z",
  turn_left: "M12 13 L12 8 Q12 5 9 5 L4 5 M7 2 L3 5 L7 8",
  turn_right: "M4 13 L4 8 Q4 5 7 5 L12 5 M9 2 L13 5 L9 8",
};

export const ACTION_ORDER = ["go_straight", "slow_stop", "turn_left", "turn_right"];
