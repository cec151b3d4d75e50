import { describe, expect, it } from "vitest";

import { sweepChartSvg } from "../src/chart.js";
import { ScriptedService } from "./fixture.js";

describe("sweepChartSvg", () => {
  it("renders one polyline per curve from the server series", () => {
    const series = new ScriptedService().sweep();
    const svg = sweepChartSvg(series);
    expect(svg).toContain("<svg");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(3);
    expect(svg).toContain("R_m");
    expect(svg).toContain("P_m");
  });

  it("monotone merged recall renders as a non-descending polyline", () => {
    const series = new ScriptedService().sweep();
    const svg = sweepChartSvg(series);
    const rm = svg.match(/<polyline[^>]*stroke="#0072B2"[^>]*points="([^"]+)"/);
    expect(rm).not.toBeNull();
    const ys = rm![1].split(" ").map((p) => parseFloat(p.split(",")[1]));
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeLessThanOrEqual(ys[i - 1] + 1e-9); // SVG y grows downward
    }
  });

  it("skips NA points instead of plotting zeros", () => {
    const svg = sweepChartSvg([
      { lambda: 0, precision: null, recall: null, merged_precision: null, merged_recall: 0.5 },
      { lambda: 1, precision: null, recall: null, merged_precision: null, merged_recall: 1 },
    ]);
    const rm = svg.match(/<polyline[^>]*stroke="#0072B2"[^>]*points="([^"]+)"/);
    expect(rm![1].split(" ")).toHaveLength(2);
    const pm = svg.match(/<polyline[^>]*stroke="#D55E00"[^>]*points="([^"]+)"/);
    expect(pm).toBeNull(); // empty polyline not emitted
  });
});
