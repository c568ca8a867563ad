import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { dimExtent, parseTrace, timeExtent } from "../src/trace.js";

const heldInput = readFileSync(new URL("./fixtures/heldinput/trace.csv", import.meta.url), "utf8");

describe("parseTrace", () => {
  it("reads the golden verifier output", () => {
    const trace = parseTrace(heldInput);
    expect(trace.steps).toBe(3);
    expect(trace.dims).toBe(1);
    expect(trace.t).toEqual([0, 1, 2]);
  });

  it("keeps the dependency-cancellation shape intact", () => {
    // held-input demo: the band pinches to a point and reopens to exactly
    // the initial interval
    const trace = parseTrace(heldInput);
    expect([trace.lo[0][0], trace.hi[0][0]]).toEqual([-1, 1]);
    expect([trace.lo[1][0], trace.hi[1][0]]).toEqual([0, 0]);
    expect([trace.lo[2][0], trace.hi[2][0]]).toEqual([-1, 1]);
  });

  it("rejects a wrong header", () => {
    expect(() => parseTrace("step,t,dim,lo\n0,0,0,1\n")).toThrow(/expected header/);
  });

  it("rejects short rows", () => {
    expect(() => parseTrace("step,t,dim,lo,hi\n0,0,0,1\n")).toThrow(/5 columns/);
  });

  it("rejects non-numeric fields", () => {
    expect(() => parseTrace("step,t,dim,lo,hi\n0,0,0,low,1\n")).toThrow(/not a number/);
  });

  it("rejects an inverted interval", () => {
    expect(() => parseTrace("step,t,dim,lo,hi\n0,0,0,2,1\n")).toThrow(/lo 2 > hi 1/);
  });

  it("rejects gaps in the (step, dim) grid", () => {
    const text = "step,t,dim,lo,hi\n0,0,0,0,1\n0,0,1,0,1\n1,1,0,0,1\n";
    expect(() => parseTrace(text)).toThrow(/missing row for step 1, dim 1/);
  });

  it("rejects duplicate rows", () => {
    const text = "step,t,dim,lo,hi\n0,0,0,0,1\n0,0,0,0,1\n";
    expect(() => parseTrace(text)).toThrow(/duplicate/);
  });

  it("rejects an empty file", () => {
    expect(() => parseTrace("step,t,dim,lo,hi\n")).toThrow(/no data rows/);
  });
});

describe("extents", () => {
  it("cover the union of the intervals", () => {
    const trace = parseTrace(heldInput);
    expect(dimExtent(trace, 0)).toEqual({ min: -1, max: 1 });
    expect(timeExtent(trace)).toEqual({ min: 0, max: 2 });
  });

  it("reject out-of-range dims", () => {
    const trace = parseTrace(heldInput);
    expect(() => dimExtent(trace, 1)).toThrow(/out of range/);
  });
});
