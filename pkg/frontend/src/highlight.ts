/** Pure view helpers over server-provided offsets.
 *
 * The UI never tokenizes or recomputes offsets: it slices the window text
 * exactly where the server said spans sit. Segments reassemble to the
 * window byte-for-byte.
 */

import type { DocumentWindow, SpanInfo } from "./types.js";

export interface Mark {
  start: number; // absolute document offsets
  end: number;
  cls: string; // concept id, or "disagreement" for the item range
}

export interface Segment {
  /** Absolute document offsets of this slice. */
  start: number;
  end: number;
  text: string;
  /** Classes covering the slice, in mark order. */
  classes: string[];
}

/** Split a window into contiguous segments at every mark boundary. */
export function windowSegments(window: DocumentWindow, marks: Mark[]): Segment[] {
  const lo = window.start;
  const hi = window.end;
  const cuts = new Set<number>([lo, hi]);
  for (const m of marks) {
    const s = Math.max(lo, Math.min(hi, m.start));
    const e = Math.max(lo, Math.min(hi, m.end));
    if (s < e) {
      cuts.add(s);
      cuts.add(e);
    }
  }
  const points = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [s, e] = [points[i], points[i + 1]];
    const classes = marks
      .filter((m) => m.start < e && s < m.end)
      .map((m) => m.cls);
    segments.push({ start: s, end: e, text: window.text.slice(s - lo, e - lo), classes });
  }
  return segments;
}

export function marksFor(
  itemStart: number,
  itemEnd: number,
  spans: SpanInfo[],
): Mark[] {
  const marks: Mark[] = spans.map((s) => ({
    start: s.start,
    end: s.end,
    cls: s.concept_id,
  }));
  marks.push({ start: itemStart, end: itemEnd, cls: "disagreement" });
  return marks;
}

/** Okabe-Ito palette: colorblind-safe, concept-keyed, stable across runs. */
const PALETTE = [
  "#E69F00",
  "#56B4E9",
  "#009E73",
  "#F0E442",
  "#0072B2",
  "#D55E00",
  "#CC79A7",
  "#999999",
];

export function conceptColor(conceptId: string): string {
  let h = 0;
  for (let i = 0; i < conceptId.length; i++) {
    h = (h * 31 + conceptId.charCodeAt(i)) >>> 0;
  }
  return PALETTE[h % PALETTE.length];
}
