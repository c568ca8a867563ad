/** Parsed reachability trace: one interval per (step, dim). */
export interface TraceFrame {
  /** number of recorded instants, step 0 included */
  steps: number;
  dims: number;
  /** timestamp of each step, steps entries */
  t: number[];
  /** lo[step][dim], hi[step][dim] */
  lo: number[][];
  hi: number[][];
}

export interface Extent {
  min: number;
  max: number;
}

const HEADER = "step,t,dim,lo,hi";

function num(field: string, line: number): number {
  const v = Number(field);
  if (field.trim() === "" || Number.isNaN(v)) {
    throw new Error(`trace.csv line ${line}: '${field}' is not a number`);
  }
  return v;
}

/**
 * Parse the CSV emitted by the verifier.
 *
 * Rows must cover every (step, dim) pair exactly once, steps contiguous
 * from 0, and each interval must satisfy lo <= hi.
 */
export function parseTrace(text: string): TraceFrame {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines[0] !== HEADER) {
    throw new Error(`trace.csv: expected header '${HEADER}', got '${lines[0] ?? ""}'`);
  }
  const cells = new Map<string, { t: number; lo: number; hi: number }>();
  let steps = 0;
  let dims = 0;
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 5) {
      throw new Error(`trace.csv line ${i + 1}: expected 5 columns, got ${parts.length}`);
    }
    const step = num(parts[0], i + 1);
    const t = num(parts[1], i + 1);
    const dim = num(parts[2], i + 1);
    const lo = num(parts[3], i + 1);
    const hi = num(parts[4], i + 1);
    if (lo > hi) {
      throw new Error(`trace.csv line ${i + 1}: lo ${lo} > hi ${hi}`);
    }
    const key = `${step},${dim}`;
    if (cells.has(key)) {
      throw new Error(`trace.csv line ${i + 1}: duplicate row for step ${step}, dim ${dim}`);
    }
    cells.set(key, { t, lo, hi });
    steps = Math.max(steps, step + 1);
    dims = Math.max(dims, dim + 1);
  }
  if (steps === 0) {
    throw new Error("trace.csv: no data rows");
  }
  const frame: TraceFrame = {
    steps,
    dims,
    t: new Array(steps).fill(0),
    lo: [],
    hi: [],
  };
  for (let s = 0; s < steps; s++) {
    const lo: number[] = [];
    const hi: number[] = [];
    for (let d = 0; d < dims; d++) {
      const cell = cells.get(`${s},${d}`);
      if (cell === undefined) {
        throw new Error(`trace.csv: missing row for step ${s}, dim ${d}`);
      }
      lo.push(cell.lo);
      hi.push(cell.hi);
      frame.t[s] = cell.t;
    }
    frame.lo.push(lo);
    frame.hi.push(hi);
  }
  return frame;
}

/** Interval range of one dimension across all steps. */
export function dimExtent(trace: TraceFrame, dim: number): Extent {
  if (dim < 0 || dim >= trace.dims) {
    throw new Error(`dim ${dim} out of range 0..${trace.dims - 1}`);
  }
  let min = Infinity;
  let max = -Infinity;
  for (let s = 0; s < trace.steps; s++) {
    min = Math.min(min, trace.lo[s][dim]);
    max = Math.max(max, trace.hi[s][dim]);
  }
  return { min, max };
}

export function timeExtent(trace: TraceFrame): Extent {
  return { min: trace.t[0], max: trace.t[trace.steps - 1] };
}
