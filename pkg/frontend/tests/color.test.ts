import { describe, expect, it } from "vitest";

import {
  ACTION_ICON_PATHS,
  ACTUAL_COLOR,
  MODEL_COLORS,
  choroplethColor,
  densityColor,
  modelColor,
} from "../src/color";

describe("model color scheme", () => {
  it("fixes the canonical assignment: black actual, red/blue/green models", () => {
    expect(ACTUAL_COLOR).toBe("#000000");
    expect(MODEL_COLORS.tcnn1).toBe("#d62728");
    expect(MODEL_COLORS.cnn_lstm).toBe("#1f77b4");
    expect(MODEL_COLORS.fcn_lstm).toBe("#2ca02c");
  });

  it("assigns additional models stable palette colors", () => {
    const models = ["tcnn1", "cnn_lstm", "fcn_lstm", "new_net", "other_net"];
    const a = modelColor("new_net", models);
    const b = modelColor("other_net", models);
    expect(a).not.toBe(b);
    expect(Object.values(MODEL_COLORS)).not.toContain(a);
    expect(modelColor("new_net", models)).toBe(a); // stable
  });
});

describe("ramps", () => {
  it("interpolates between endpoints", () => {
    expect(choroplethColor(0)).toBe("rgb(247,251,255)");
    expect(choroplethColor(1)).toBe("rgb(8,81,156)");
    expect(densityColor(0)).toBe("rgb(68,1,84)");
    expect(densityColor(1)).toBe("rgb(253,231,37)");
  });

  it("clamps out-of-range inputs", () => {
    expect(choroplethColor(-1)).toBe(choroplethColor(0));
    expect(choroplethColor(2)).toBe(choroplethColor(1));
  });
});

describe("action icons", () => {
  it("has one glyph per discrete action", () => {
    expect(Object.keys(ACTION_ICON_PATHS).sort()).toEqual([
      "go_straight",
      "slow_stop",
      "turn_left",
      "turn_right",
    ]);
  });
});
