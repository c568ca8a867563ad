/** Deterministic SVG assembly: no dates, no randomness, fixed formatting. */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 56, right: 16, top: 28, bottom: 40 };

export const PALETTE = [
  "#3565a8",
  "#d9622b",
  "#3e8a47",
  "#b83a3a",
  "#7a5aa8",
  "#867057",
  "#c77da8",
  "#5b8f9e",
  "#a8a23c",
  "#666666",
];

export function color(k: number): string {
  return PALETTE[k % PALETTE.length];
}

/** Pixel coordinate, at most 2 decimals, no trailing zeros, no negative zero. */
export function px(v: number): string {
  const s = v.toFixed(2).replace(/\.?0+$/, "");
  return s === "-0" ? "0" : s;
}

/** Tick label: three significant digits through Number round-trip. */
export function tick(v: number): string {
  const r = Number(v.toPrecision(3));
  return (r === 0 ? 0 : r).toString();
}

export interface Scale {
  (v: number): number;
  min: number;
  max: number;
}

/** Linear map from a data extent onto [pxLo, pxHi]; degenerate extents get padded. */
export function linearScale(min: number, max: number, pxLo: number, pxHi: number): Scale {
  let lo = min;
  let hi = max;
  if (lo === hi) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const f = ((v: number) => pxLo + ((v - lo) / (hi - lo)) * (pxHi - pxLo)) as Scale;
  f.min = min;
  f.max = max;
  return f;
}

export interface Area {
  x0: number;
  x1: number;
  /** pixel row of the data minimum; below y1 because SVG y grows downward */
  y0: number;
  y1: number;
}

export function plotArea(): Area {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

function ticksOf(s: Scale, n = 5): number[] {
  const lo = Math.min(s.min, s.max);
  const hi = Math.max(s.min, s.max);
  if (lo === hi) {
    return [lo];
  }
  const out: number[] = [];
  for (let i = 0; i <= n; i++) {
    out.push(lo + ((hi - lo) * i) / n);
  }
  return out;
}

export function axes(x: Scale, y: Scale, xLabel: string, yLabel: string, area?: Area): string {
  const a = area ?? plotArea();
  const parts: string[] = [];
  parts.push(
    `<rect x="${px(a.x0)}" y="${px(a.y1)}" width="${px(a.x1 - a.x0)}" height="${px(a.y0 - a.y1)}" fill="none" stroke="#222" stroke-width="1"/>`
  );
  for (const v of ticksOf(x)) {
    const p = x(v);
    parts.push(`<line x1="${px(p)}" y1="${px(a.y0)}" x2="${px(p)}" y2="${px(a.y0 + 4)}" stroke="#222"/>`);
    parts.push(
      `<text x="${px(p)}" y="${px(a.y0 + 16)}" font-size="11" text-anchor="middle" fill="#222">${tick(v)}</text>`
    );
  }
  for (const v of ticksOf(y)) {
    const p = y(v);
    parts.push(`<line x1="${px(a.x0 - 4)}" y1="${px(p)}" x2="${px(a.x0)}" y2="${px(p)}" stroke="#222"/>`);
    parts.push(
      `<text x="${px(a.x0 - 7)}" y="${px(p + 3.5)}" font-size="11" text-anchor="end" fill="#222">${tick(v)}</text>`
    );
  }
  parts.push(
    `<text x="${px((a.x0 + a.x1) / 2)}" y="${px(a.y0 + 32)}" font-size="12" text-anchor="middle" fill="#222">${xLabel}</text>`
  );
  const ly = (a.y0 + a.y1) / 2;
  parts.push(
    `<text x="${px(a.x0 - 42)}" y="${px(ly)}" font-size="12" text-anchor="middle" fill="#222" transform="rotate(-90 ${px(a.x0 - 42)} ${px(ly)})">${yLabel}</text>`
  );
  return parts.join("\n");
}

/**
 * Wrap body markup in a standalone SVG document.
 *
 * The exact data extents are stamped as attributes so consumers (and the
 * tests) can read back what was plotted without parsing coordinates.
 */
export function document(body: string, extentX: [number, number], extentY: [number, number]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}"`,
    `  data-extent-x="${extentX[0]} ${extentX[1]}" data-extent-y="${extentY[0]} ${extentY[1]}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
