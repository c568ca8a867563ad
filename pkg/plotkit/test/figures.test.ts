import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseSplits } from "../src/splits.js";
import { parseTrace } from "../src/trace.js";
import { plotProjection } from "../src/projection.js";
import { plotTiling } from "../src/tiling.js";
import { plotTube } from "../src/tube.js";

const heldInputCsv = readFileSync(new URL("./fixtures/heldinput/trace.csv", import.meta.url), "utf8");
const planarCsv = readFileSync(new URL("./fixtures/planar/trace.csv", import.meta.url), "utf8");
const planarSplits = readFileSync(new URL("./fixtures/planar/splits.json", import.meta.url), "utf8");

function out(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "plotkit-")), name);
}

function stamped(svg: string, axis: "x" | "y"): string {
  const m = svg.match(new RegExp(`data-extent-${axis}="([^"]+)"`));
  expect(m).not.toBeNull();
  return m![1];
}

// extents recomputed straight from the artifact text, bypassing the parser
function csvExtents(csv: string): { t: number[]; lo: number[]; hi: number[] } {
  const rows = csv.trim().split("\n").slice(1).map((ln) => ln.split(",").map(Number));
  return {
    t: rows.map((r) => r[1]),
    lo: rows.map((r) => r[3]),
    hi: rows.map((r) => r[4]),
  };
}

describe("plotTube", () => {
  it("regenerates the golden tube figure with exact data extents", () => {
    const path = out("tube.svg");
    const svg = plotTube(parseTrace(heldInputCsv), null, path);
    expect(existsSync(path)).toBe(true);
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg).toContain("</svg>");

    const raw = csvExtents(heldInputCsv);
    expect(stamped(svg, "x")).toBe(`${Math.min(...raw.t)} ${Math.max(...raw.t)}`);
    expect(stamped(svg, "y")).toBe(`${Math.min(...raw.lo)} ${Math.max(...raw.hi)}`);
  });

  it("draws a one-step constant trace as a flat band", () => {
    const trace = parseTrace("step,t,dim,lo,hi\n0,0.0,0,0.5,0.5\n");
    const svg = plotTube(trace, null, out("flat.svg"));
    expect(stamped(svg, "x")).toBe("0 0");
    expect(stamped(svg, "y")).toBe("0.5 0.5");
    expect(svg).toContain("<rect");
    expect(svg).not.toContain("<polygon");
  });

  it("is deterministic", () => {
    const a = plotTube(parseTrace(planarCsv), [0, 1], out("a.svg"));
    const b = plotTube(parseTrace(planarCsv), [0, 1], out("b.svg"));
    expect(a).toBe(b);
  });

  it("keeps the canvas size independent of the data", () => {
    const a = plotTube(parseTrace(heldInputCsv), null, out("a.svg"));
    const b = plotTube(parseTrace(planarCsv), null, out("b.svg"));
    const size = (svg: string) => svg.match(/width="(\d+)" height="(\d+)"/)![0];
    expect(size(a)).toBe(size(b));
  });
});

describe("plotProjection", () => {
  it("draws one frame per step", () => {
    const trace = parseTrace(planarCsv);
    const svg = plotProjection(trace, [0, 1], out("proj.svg"));
    const frames = svg.match(/fill-opacity="0.08"/g) ?? [];
    expect(frames.length).toBe(trace.steps);
  });

  it("stamps the extents of the chosen pair", () => {
    const trace = parseTrace(planarCsv);
    const svg = plotProjection(trace, [1, 0], out("proj.svg"));
    const lo = (d: number) => Math.min(...trace.lo.map((row) => row[d]));
    const hi = (d: number) => Math.max(...trace.hi.map((row) => row[d]));
    expect(stamped(svg, "x")).toBe(`${lo(1)} ${hi(1)}`);
    expect(stamped(svg, "y")).toBe(`${lo(0)} ${hi(0)}`);
  });
});

describe("plotTiling", () => {
  it("regenerates the golden tiling figure with exact tiling extents", () => {
    const path = out("tiling.svg");
    const svg = plotTiling(parseSplits(planarSplits), path);
    expect(existsSync(path)).toBe(true);

    const raw = JSON.parse(planarSplits);
    const boxes: number[][][] = raw.leaves.map((l: any) => l.box);
    const xs = boxes.map((b) => b[0]);
    const ys = boxes.map((b) => b[1]);
    expect(stamped(svg, "x")).toBe(
      `${Math.min(...xs.map((p) => p[0]))} ${Math.max(...xs.map((p) => p[1]))}`
    );
    expect(stamped(svg, "y")).toBe(
      `${Math.min(...ys.map((p) => p[0]))} ${Math.max(...ys.map((p) => p[1]))}`
    );
  });

  it("gives a leaf and its image the same color", () => {
    const tree = parseSplits(planarSplits);
    const svg = plotTiling(tree, out("tiling.svg"));
    const fills = [...svg.matchAll(/<rect[^>]*fill="(#[0-9a-f]{6})" fill-opacity="0.3"/g)].map(
      (m) => m[1]
    );
    const n = tree.leaves.length;
    expect(fills.length).toBe(2 * n);
    for (let k = 0; k < n; k++) {
      expect(fills[n + k]).toBe(fills[k]);
    }
  });

  it("is deterministic", () => {
    const a = plotTiling(parseSplits(planarSplits), out("a.svg"));
    const b = plotTiling(parseSplits(planarSplits), out("b.svg"));
    expect(a).toBe(b);
  });

  it("lays 1-D leaves out as stacked bars", () => {
    const tree = parseSplits(
      JSON.stringify({
        is_ra_ok: true,
        mode: "backward",
        splits: 1,
        edges: [[0, 1], [0, 2]],
        leaves: [
          { label: 1, parent: 0, box: [[0, 1]], t_err: null, satisfied: true, cap: null, failed: false },
          { label: 2, parent: 0, box: [[1, 2]], t_err: null, satisfied: true, cap: null, failed: false },
        ],
      })
    );
    const svg = plotTiling(tree, out("bars.svg"));
    expect(stamped(svg, "x")).toBe("0 2");
    expect(stamped(svg, "y")).toBe("0.15 1.85");
  });

  it("marks failed leaves", () => {
    const raw = JSON.parse(planarSplits);
    raw.leaves[0].failed = true;
    const svg = plotTiling(parseSplits(JSON.stringify(raw)), out("failed.svg"));
    expect(svg).toContain('stroke-dasharray="5 3"');
  });
});
