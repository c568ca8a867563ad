#!/usr/bin/env node
/**
 * plotkit tube       --trace trace.csv [--dims 0,1] --out fig.svg
 * plotkit projection --trace trace.csv --dims 0,1 --out fig.svg
 * plotkit tiling     --splits splits.json --out fig.svg
 */

import { readFileSync } from "node:fs";

import { parseTrace } from "./trace.js";
import { parseSplits } from "./splits.js";
import { plotTube } from "./tube.js";
import { plotProjection } from "./projection.js";
import { plotTiling } from "./tiling.js";

class UsageError extends Error {}

function parseArgs(argv: string[]): { cmd: string; opts: Map<string, string> } {
  const [cmd, ...rest] = argv;
  const opts = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new UsageError(`expected --flag value pairs, got '${key}'`);
    }
    opts.set(key.slice(2), rest[i + 1]);
  }
  return { cmd: cmd ?? "", opts };
}

function need(opts: Map<string, string>, key: string): string {
  const v = opts.get(key);
  if (v === undefined) {
    throw new UsageError(`missing --${key}`);
  }
  return v;
}

function dimsOf(opts: Map<string, string>): number[] | null {
  const raw = opts.get("dims");
  if (raw === undefined) {
    return null;
  }
  const dims = raw.split(",").map((p) => Number(p));
  if (dims.length === 0 || dims.some((d) => !Number.isInteger(d) || d < 0)) {
    throw new UsageError(`--dims must be comma-separated indices, got '${raw}'`);
  }
  return dims;
}

export function main(argv: string[]): number {
  try {
    const { cmd, opts } = parseArgs(argv);
    if (cmd === "tube") {
      const trace = parseTrace(readFileSync(need(opts, "trace"), "utf8"));
      plotTube(trace, dimsOf(opts), need(opts, "out"));
    } else if (cmd === "projection") {
      const trace = parseTrace(readFileSync(need(opts, "trace"), "utf8"));
      const dims = dimsOf(opts);
      if (dims === null || dims.length !== 2) {
        throw new UsageError("projection needs --dims i,j");
      }
      plotProjection(trace, [dims[0], dims[1]], need(opts, "out"));
    } else if (cmd === "tiling") {
      const tree = parseSplits(readFileSync(need(opts, "splits"), "utf8"));
      plotTiling(tree, need(opts, "out"));
    } else {
      throw new UsageError(`unknown command '${cmd}'; expected tube, projection, or tiling`);
    }
    console.log(`wrote ${opts.get("out")}`);
    return 0;
  } catch (e) {
    if (e instanceof UsageError) {
      console.error(`usage error: ${e.message}`);
      return 2;
    }
    console.error((e as Error).message);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
