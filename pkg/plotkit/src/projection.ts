import { writeFileSync } from "node:fs";

import { TraceFrame, dimExtent } from "./trace.js";
import { axes, color, document, linearScale, plotArea, px } from "./svg.js";

/** Interval frames of a dimension pair, one rectangle per step. */
export function plotProjection(trace: TraceFrame, dimPair: [number, number], outPath: string): string {
  const [i, j] = dimPair;
  const ex = dimExtent(trace, i);
  const ey = dimExtent(trace, j);

  const a = plotArea();
  const x = linearScale(ex.min, ex.max, a.x0, a.x1);
  const y = linearScale(ey.min, ey.max, a.y0, a.y1);

  const parts: string[] = [axes(x, y, `x${i + 1}`, `x${j + 1}`)];
  for (let s = 0; s < trace.steps; s++) {
    const c = color(s);
    const left = x(trace.lo[s][i]);
    const right = x(trace.hi[s][i]);
    const top = y(trace.hi[s][j]);
    const bot = y(trace.lo[s][j]);
    parts.push(
      `<rect x="${px(left)}" y="${px(top)}" width="${px(right - left)}" height="${px(bot - top)}" fill="${c}" fill-opacity="0.08" stroke="${c}" stroke-width="1.2"/>`
    );
    parts.push(
      `<text x="${px(right + 3)}" y="${px(top + 11)}" font-size="10" fill="${c}">${s}</text>`
    );
  }

  const svg = document(parts.join("\n"), [ex.min, ex.max], [ey.min, ey.max]);
  writeFileSync(outPath, svg);
  return svg;
}
