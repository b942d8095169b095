/** Minimal deterministic SVG building blocks (no DOM, no dependencies). */

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toPrecision(7);
  // trim trailing zeros for stable, compact output
  return s.includes(".") ? s.replace(/\.?0+($|e)/, "$1") : s;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface Scale {
  (v: number): number;
  ticks: number[];
}

/** Linear scale from [lo, hi] onto [a, b] with ~n round-valued ticks. */
export function linearScale(
  lo: number,
  hi: number,
  a: number,
  b: number,
  n = 5,
): Scale {
  if (!(hi > lo)) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const span = hi - lo;
  const f = (v: number) => a + ((v - lo) / span) * (b - a);
  const rawStep = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rawStep) ?? mag * 10;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return Object.assign(f, { ticks });
}

export function polyline(
  xs: number[],
  ys: number[],
  attrs: string,
): string {
  if (!xs.length) return "";
  const pts = xs.map((x, i) => `${fmt(x)},${fmt(ys[i])}`).join(" ");
  return `<polyline fill="none" ${attrs} points="${pts}"/>`;
}

export function polygon(xs: number[], ys: number[], attrs: string): string {
  if (!xs.length) return "";
  const pts = xs.map((x, i) => `${fmt(x)},${fmt(ys[i])}`).join(" ");
  return `<polygon ${attrs} points="${pts}"/>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  attrs = "",
): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${esc(content)}</text>`;
}

export function circle(x: number, y: number, r: number, attrs = ""): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" ${attrs}/>`;
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  attrs: string,
): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${attrs}/>`;
}

export const STYLE = `
  text { font-family: Helvetica, Arial, sans-serif; font-size: 11px; fill: #333; }
  .title { font-size: 13px; font-weight: bold; }
  .axis { stroke: #444; stroke-width: 1; }
  .grid { stroke: #ddd; stroke-width: 0.5; }
  .series-x { stroke: #1f77b4; stroke-width: 1.4; }
  .series-y { stroke: #2ca02c; stroke-width: 1.4; }
  .band { fill: #1f77b4; fill-opacity: 0.08; stroke: none; }
  .bound { stroke: #1f77b4; stroke-width: 1; stroke-dasharray: 5 3; opacity: 0.7; }
  .bound-y { stroke: #2ca02c; stroke-width: 1; stroke-dasharray: 2 3; opacity: 0.7; }
  .violation { fill: #d62728; stroke: none; }
  .vel { stroke: #9467bd; stroke-width: 1.6; }
  .ufp-x { fill: #1f77b4; }
  .ufp-y { fill: #2ca02c; }
  .warning { fill: #b15928; font-style: italic; }
  .legend { font-size: 10px; }
`;
