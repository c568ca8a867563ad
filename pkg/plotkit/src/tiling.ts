import { writeFileSync } from "node:fs";

import { Leaf, SplitTree } from "./splits.js";
import { Area, HEIGHT, MARGIN, WIDTH, axes, color, document, linearScale, px } from "./svg.js";

interface Rect {
  x: [number, number];
  y: [number, number];
}

// 1-D trees are drawn as bars stacked by leaf order; higher dims project
// onto the first two.
function inputRect(leaf: Leaf, index: number): Rect {
  if (leaf.box.length === 1) {
    return { x: leaf.box[0], y: [index + 0.15, index + 0.85] };
  }
  return { x: leaf.box[0], y: leaf.box[1] };
}

function outputRect(leaf: Leaf, index: number): Rect | null {
  if (leaf.hulls === null || leaf.hulls.length === 0) {
    return null;
  }
  const final = leaf.hulls[leaf.hulls.length - 1];
  if (final.length === 1) {
    return { x: final[0], y: [index + 0.15, index + 0.85] };
  }
  return { x: final[0], y: final[1] };
}

function union(rects: (Rect | null)[]): { x: [number, number]; y: [number, number] } {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const r of rects) {
    if (r === null) {
      continue;
    }
    xMin = Math.min(xMin, r.x[0]);
    xMax = Math.max(xMax, r.x[1]);
    yMin = Math.min(yMin, r.y[0]);
    yMax = Math.max(yMax, r.y[1]);
  }
  return { x: [xMin, xMax], y: [yMin, yMax] };
}

function stroke(leaf: Leaf): string {
  if (leaf.failed) {
    return `stroke="#b02a2a" stroke-width="2" stroke-dasharray="5 3"`;
  }
  if (leaf.satisfied) {
    return `stroke="#222" stroke-width="1"`;
  }
  return `stroke="#b02a2a" stroke-width="1.5"`;
}

function panel(
  rects: (Rect | null)[],
  leaves: Leaf[],
  area: Area,
  title: string,
  oneD: boolean,
  withLabels: boolean
): string {
  const ext = union(rects);
  const x = linearScale(ext.x[0], ext.x[1], area.x0, area.x1);
  const y = linearScale(ext.y[0], ext.y[1], area.y0, area.y1);
  const parts: string[] = [axes(x, y, "x1", oneD ? "leaf" : "x2", area)];
  rects.forEach((r, k) => {
    if (r === null) {
      return;
    }
    const leaf = leaves[k];
    const left = x(r.x[0]);
    const top = y(r.y[1]);
    parts.push(
      `<rect x="${px(left)}" y="${px(top)}" width="${px(x(r.x[1]) - left)}" height="${px(y(r.y[0]) - top)}" fill="${color(k)}" fill-opacity="0.3" ${stroke(leaf)}/>`
    );
    if (withLabels) {
      parts.push(
        `<text x="${px((x(r.x[0]) + x(r.x[1])) / 2)}" y="${px((y(r.y[0]) + y(r.y[1])) / 2 + 3.5)}" font-size="10" text-anchor="middle" fill="#222">${leaf.label}</text>`
      );
    }
  });
  parts.push(
    `<text x="${px((area.x0 + area.x1) / 2)}" y="${px(area.y1 - 8)}" font-size="12" text-anchor="middle" fill="#222">${title}</text>`
  );
  return parts.join("\n");
}

/**
 * Initial-set tiling next to the per-leaf reachable sets at the horizon,
 * with matching colors so each slice can be traced to its image.
 *
 * The stamped extents are those of the left panel (the tiling itself).
 */
export function plotTiling(tree: SplitTree, outPath: string): string {
  const leaves = tree.leaves;
  if (leaves.length === 0) {
    throw new Error("splits.json: no leaves to draw");
  }
  const oneD = leaves[0].box.length === 1;
  const inputs = leaves.map(inputRect);
  const outputs = leaves.map(outputRect);

  const gap = 34;
  const mid = (MARGIN.left + WIDTH - MARGIN.right) / 2;
  const left: Area = { x0: MARGIN.left, x1: mid - gap / 2, y0: HEIGHT - MARGIN.bottom, y1: MARGIN.top + 14 };
  const right: Area = { x0: mid + gap / 2 + 34, x1: WIDTH - MARGIN.right, y0: left.y0, y1: left.y1 };

  const parts = [
    panel(inputs, leaves, left, "initial tiling", oneD, true),
    panel(outputs, leaves, right, `reachable at horizon (${tree.mode})`, oneD, false),
  ];
  const ext = union(inputs);

  const svg = document(parts.join("\n"), ext.x, ext.y);
  writeFileSync(outPath, svg);
  return svg;
}
