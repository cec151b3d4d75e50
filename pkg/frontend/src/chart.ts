/** Inline SVG rendering for the lambda tradeoff curves. No charting deps:
 * three polylines over a fixed viewbox is all this needs. */

import type { SweepPoint } from "./types.js";

const WIDTH = 360;
const HEIGHT = 200;
const PAD = 28;

function x(lambda: number): number {
  return PAD + lambda * (WIDTH - 2 * PAD);
}

function y(value: number): number {
  return HEIGHT - PAD - value * (HEIGHT - 2 * PAD);
}

function polyline(points: Array<[number, number]>, stroke: string, dash = ""): string {
  if (points.length === 0) return "";
  const attr = points.map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline fill="none" stroke="${stroke}" stroke-width="2"${dashAttr} points="${attr}" />`;
}

export function sweepChartSvg(series: SweepPoint[]): string {
  const curves: Array<{ key: keyof SweepPoint; color: string; dash: string; label: string }> = [
    { key: "merged_recall", color: "#0072B2", dash: "", label: "R_m" },
    { key: "recall", color: "#56B4E9", dash: "4 3", label: "R" },
    { key: "merged_precision", color: "#D55E00", dash: "", label: "P_m" },
  ];
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="lambda tradeoff">`,
    `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#fff" />`,
    `<line x1="${PAD}" y1="${y(0)}" x2="${WIDTH - PAD}" y2="${y(0)}" stroke="#ccc" />`,
    `<line x1="${x(0)}" y1="${PAD}" x2="${x(0)}" y2="${HEIGHT - PAD}" stroke="#ccc" />`,
  );
  for (const grid of [0, 0.5, 1]) {
    parts.push(
      `<text x="${x(grid)}" y="${HEIGHT - 8}" font-size="10" text-anchor="middle">${grid}</text>`,
    );
  }
  let legendY = PAD;
  for (const curve of curves) {
    const pts: Array<[number, number]> = [];
    for (const p of series) {
      const v = p[curve.key];
      if (typeof v === "number") pts.push([x(p.lambda), y(v)]);
    }
    parts.push(polyline(pts, curve.color, curve.dash));
    parts.push(
      `<text x="${WIDTH - PAD + 2}" y="${legendY}" font-size="10" fill="${curve.color}">${curve.label}</text>`,
    );
    legendY += 12;
  }
  parts.push(`<text x="${WIDTH / 2}" y="${HEIGHT - 20 + 16}" font-size="10" text-anchor="middle">lambda</text>`);
  parts.push("</svg>");
  return parts.join("");
}
