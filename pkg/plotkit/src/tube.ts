import { writeFileSync } from "node:fs";

import { TraceFrame, dimExtent, timeExtent } from "./trace.js";
import { axes, color, document, linearScale, plotArea, px } from "./svg.js";

/**
 * Reachable tube over time: one filled band per requested dimension.
 *
 * A single-step trace has no time span to sweep, so its intervals are
 * drawn as flat bands across the frame.
 */
export function plotTube(trace: TraceFrame, dims: number[] | null, outPath: string): string {
  const sel = dims === null || dims.length === 0 ? [...Array(trace.dims).keys()] : dims;
  const ext = sel.map((d) => dimExtent(trace, d));
  const yMin = Math.min(...ext.map((e) => e.min));
  const yMax = Math.max(...ext.map((e) => e.max));
  const tExt = timeExtent(trace);

  const a = plotArea();
  const x = linearScale(tExt.min, tExt.max, a.x0, a.x1);
  const y = linearScale(yMin, yMax, a.y0, a.y1);

  const parts: string[] = [axes(x, y, "t", "state")];
  sel.forEach((d, k) => {
    const c = color(k);
    if (trace.steps === 1) {
      const top = y(trace.hi[0][d]);
      const bot = y(trace.lo[0][d]);
      parts.push(
        `<rect x="${px(a.x0)}" y="${px(top)}" width="${px(a.x1 - a.x0)}" height="${px(bot - top)}" fill="${c}" fill-opacity="0.35" stroke="${c}"/>`
      );
    } else {
      const upper = trace.t.map((t, s) => `${px(x(t))},${px(y(trace.hi[s][d]))}`);
      const lower = trace.t.map((t, s) => `${px(x(t))},${px(y(trace.lo[s][d]))}`).reverse();
      parts.push(
        `<polygon points="${[...upper, ...lower].join(" ")}" fill="${c}" fill-opacity="0.35" stroke="${c}" stroke-width="1"/>`
      );
    }
    const lx = a.x0 + 8;
    const ly = a.y1 + 14 + 14 * k;
    parts.push(`<rect x="${px(lx)}" y="${px(ly - 8)}" width="10" height="10" fill="${c}" fill-opacity="0.55"/>`);
    parts.push(`<text x="${px(lx + 14)}" y="${px(ly)}" font-size="11" fill="#222">x${d + 1}</text>`);
  });

  const svg = document(parts.join("\n"), [tExt.min, tExt.max], [yMin, yMax]);
  writeFileSync(outPath, svg);
  return svg;
}
