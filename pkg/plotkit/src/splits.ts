/** Parsed split tree as written by the partition command. */
export interface Leaf {
  label: number;
  parent: number | null;
  /** per-dim [lo, hi] of this leaf's slice of the initial set */
  box: [number, number][];
  tErr: number | null;
  satisfied: boolean;
  failed: boolean;
  /** hulls[step][dim] = [lo, hi] of the leaf's own trace, when it ran */
  hulls: [number, number][][] | null;
}

export interface SplitTree {
  isRaOk: boolean;
  mode: string;
  splits: number;
  edges: [number, number][];
  leaves: Leaf[];
}

function boxOf(raw: unknown, what: string): [number, number][] {
  if (!Array.isArray(raw) || raw.length === 0) {
    throw new Error(`splits.json: ${what} is not a box`);
  }
  return raw.map((pair, d) => {
    if (!Array.isArray(pair) || pair.length !== 2 || pair.some((v) => typeof v !== "number")) {
      throw new Error(`splits.json: ${what}[${d}] is not an [lo, hi] pair`);
    }
    return [pair[0], pair[1]];
  });
}

export function parseSplits(text: string): SplitTree {
  let raw: any;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new Error(`splits.json: not valid JSON (${(e as Error).message})`);
  }
  for (const key of ["is_ra_ok", "mode", "splits", "leaves"]) {
    if (!(key in raw)) {
      throw new Error(`splits.json: missing key '${key}'`);
    }
  }
  const leaves: Leaf[] = raw.leaves.map((entry: any, k: number) => {
    if (typeof entry.label !== "number") {
      throw new Error(`splits.json: leaf ${k} has no numeric label`);
    }
    return {
      label: entry.label,
      parent: entry.parent ?? null,
      box: boxOf(entry.box, `leaf ${k} box`),
      tErr: entry.t_err ?? null,
      satisfied: Boolean(entry.satisfied),
      failed: Boolean(entry.failed),
      hulls: entry.hulls ? entry.hulls.map((h: unknown, s: number) => boxOf(h, `leaf ${k} hull ${s}`)) : null,
    };
  });
  const dims = leaves[0]?.box.length ?? 0;
  for (const leaf of leaves) {
    if (leaf.box.length !== dims) {
      throw new Error(`splits.json: leaf ${leaf.label} has ${leaf.box.length} dims, expected ${dims}`);
    }
  }
  return {
    isRaOk: Boolean(raw.is_ra_ok),
    mode: String(raw.mode),
    splits: raw.splits,
    edges: (raw.edges ?? []).map((e: [number, number]) => [e[0], e[1]]),
    leaves,
  };
}
