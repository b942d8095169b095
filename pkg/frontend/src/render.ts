/**
 * Comparison-figure renderer: one column per log, one row per panel.
 *
 * Inputs are read once and never written; output is a pure function of
 * the CSV contents and the figure spec, so repeated renders are
 * byte-identical.  Violation markers carry a `data-row` attribute naming
 * the log row they mark, which keeps the figure checkable against the
 * log it came from.
 */

import * as fs from "fs";
import * as path from "path";

import { FigureSpec, PanelKind } from "./figure";
import {
  LogRow,
  SchemaError,
  impactRows,
  parseLog,
  stepLateralVelocity,
  violationRows,
} from "./schema";
import {
  STYLE,
  circle,
  fmt,
  line,
  linearScale,
  polygon,
  polyline,
  text,
} from "./svg";

interface Cell {
  x: number;
  y: number;
  w: number;
  h: number;
}

const M = { left: 52, right: 14, top: 22, bottom: 32 };

function frame(cell: Cell, title: string, yLabel: string): string[] {
  const parts: string[] = [];
  const x0 = cell.x + M.left;
  const y0 = cell.y + M.top;
  const x1 = cell.x + cell.w - M.right;
  const y1 = cell.y + cell.h - M.bottom;
  parts.push(line(x0, y1, x1, y1, 'class="axis"'));
  parts.push(line(x0, y0, x0, y1, 'class="axis"'));
  parts.push(text(cell.x + M.left, cell.y + 14, title, 'class="legend"'));
  parts.push(
    text(cell.x + 12, (y0 + y1) / 2, yLabel,
      `class="legend" transform="rotate(-90 ${fmt(cell.x + 12)} ${fmt((y0 + y1) / 2)})" text-anchor="middle"`),
  );
  return parts;
}

function plotArea(cell: Cell): { x0: number; y0: number; x1: number; y1: number } {
  return {
    x0: cell.x + M.left,
    y0: cell.y + M.top,
    x1: cell.x + cell.w - M.right,
    y1: cell.y + cell.h - M.bottom,
  };
}

function axes(
  cell: Cell,
  sx: ReturnType<typeof linearScale>,
  sy: ReturnType<typeof linearScale>,
): string[] {
  const { x0, y0, x1, y1 } = plotArea(cell);
  const parts: string[] = [];
  for (const tick of sx.ticks) {
    const px = sx(tick);
    parts.push(line(px, y0, px, y1, 'class="grid"'));
    parts.push(text(px, y1 + 14, fmt(tick), 'text-anchor="middle"'));
  }
  for (const tick of sy.ticks) {
    const py = sy(tick);
    parts.push(line(x0, py, x1, py, 'class="grid"'));
    parts.push(text(x0 - 4, py + 3, fmt(tick), 'text-anchor="end"'));
  }
  return parts;
}

function emptyPanel(cell: Cell, title: string, yLabel: string): string[] {
  const parts = frame(cell, title, yLabel);
  const { x0, y0, x1, y1 } = plotArea(cell);
  parts.push(
    text((x0 + x1) / 2, (y0 + y1) / 2, "empty log (header only)",
      'class="warning" text-anchor="middle"'),
  );
  return parts;
}

function offsetsPanel(cell: Cell, rows: LogRow[], label: string): string[] {
  const title = `${label}: CoM offsets vs slip bounds`;
  if (!rows.length) return emptyPanel(cell, title, "offset [m]");
  const { x0, y0, x1, y1 } = plotArea(cell);
  const ts = rows.map((r) => r.t);
  const bx = rows.map((r) => r.slip_bound_x);
  const by = rows.map((r) => r.slip_bound_y);
  const xs = rows.map((r) => r.x_c);
  const ys = rows.map((r) => r.y_c);
  const values = [...xs, ...ys, ...bx, ...by.map((v) => -v)];
  const lo = Math.min(...values, ...bx.map((v) => -v)) * 1.1;
  const hi = Math.max(...values) * 1.1;
  const sx = linearScale(ts[0], ts[ts.length - 1], x0, x1, 6);
  const sy = linearScale(lo, hi, y1, y0, 5);
  const parts = frame(cell, title, "offset [m]");
  parts.push(...axes(cell, sx, sy));
  // shaded admissible band for x_c between the signed slip bounds
  const px = ts.map(sx);
  parts.push(
    polygon(
      [...px, ...px.slice().reverse()],
      [...bx.map(sy), ...bx.map((v) => sy(-v)).reverse()],
      'class="band"',
    ),
  );
  parts.push(polyline(px, bx.map(sy), 'class="bound"'));
  parts.push(polyline(px, bx.map((v) => sy(-v)), 'class="bound"'));
  parts.push(polyline(px, by.map(sy), 'class="bound-y"'));
  parts.push(polyline(px, by.map((v) => sy(-v)), 'class="bound-y"'));
  parts.push(polyline(px, xs.map(sy), 'class="series-x"'));
  parts.push(polyline(px, ys.map(sy), 'class="series-y"'));
  for (const i of violationRows(rows)) {
    parts.push(
      circle(sx(ts[i]), sy(xs[i]), 2.2, `class="violation" data-row="${i}"`),
    );
  }
  parts.push(text(x1 - 150, y0 + 12, "x_c", 'class="legend" fill="#1f77b4"'));
  parts.push(text(x1 - 120, y0 + 12, "y_c", 'class="legend" fill="#2ca02c"'));
  parts.push(text(x1 - 88, y0 + 12, "violations", 'class="legend" fill="#d62728"'));
  parts.push(text((x0 + x1) / 2, y1 + 26, "t [s]", 'text-anchor="middle"'));
  return parts;
}

function lateralVelocityPanel(cell: Cell, rows: LogRow[], label: string): string[] {
  const title = `${label}: per-step lateral velocity`;
  if (!rows.length) return emptyPanel(cell, title, "v_y [m/s]");
  const { x0, y0, x1, y1 } = plotArea(cell);
  const segs = stepLateralVelocity(rows);
  const vs = segs.map((s) => s.v);
  const lo = Math.min(...vs, 0) - 0.05;
  const hi = Math.max(...vs, 0) + 0.05;
  const ts = rows.map((r) => r.t);
  const sx = linearScale(ts[0], ts[ts.length - 1], x0, x1, 6);
  const sy = linearScale(lo, hi, y1, y0, 5);
  const parts = frame(cell, title, "v_y [m/s]");
  parts.push(...axes(cell, sx, sy));
  parts.push(line(x0, sy(0), x1, sy(0), 'class="axis" opacity="0.5"'));
  for (const s of segs) {
    parts.push(line(sx(s.t0), sy(s.v), sx(s.t1), sy(s.v), 'class="vel"'));
  }
  parts.push(text((x0 + x1) / 2, y1 + 26, "t [s]", 'text-anchor="middle"'));
  return parts;
}

function placementsPanel(cell: Cell, rows: LogRow[], label: string): string[] {
  const title = `${label}: foot placements per step`;
  if (!rows.length) return emptyPanel(cell, title, "u_fp [m]");
  const { x0, y0, x1, y1 } = plotArea(cell);
  const impacts = impactRows(rows);
  const ux = impacts.map((i) => rows[i].ufp_x as number);
  const uy = impacts.map((i) => rows[i].ufp_y as number);
  const ts = impacts.map((i) => rows[i].t);
  const values = [...ux, ...uy, 0];
  const lo = Math.min(...values) - 0.05;
  const hi = Math.max(...values) + 0.05;
  const sx = linearScale(rows[0].t, rows[rows.length - 1].t, x0, x1, 6);
  const sy = linearScale(lo, hi, y1, y0, 5);
  const parts = frame(cell, title, "u_fp [m]");
  parts.push(...axes(cell, sx, sy));
  parts.push(line(x0, sy(0), x1, sy(0), 'class="axis" opacity="0.5"'));
  ts.forEach((t, k) => {
    parts.push(circle(sx(t), sy(ux[k]), 2.4, 'class="ufp-x"'));
    parts.push(circle(sx(t), sy(uy[k]), 2.4, 'class="ufp-y"'));
  });
  parts.push(text(x1 - 110, y0 + 12, "u_x", 'class="legend" fill="#1f77b4"'));
  parts.push(text(x1 - 80, y0 + 12, "u_y", 'class="legend" fill="#2ca02c"'));
  parts.push(text((x0 + x1) / 2, y1 + 26, "t [s]", 'text-anchor="middle"'));
  return parts;
}

const PANEL_RENDERERS: Record<
  PanelKind,
  (cell: Cell, rows: LogRow[], label: string) => string[]
> = {
  offsets: offsetsPanel,
  "lateral-velocity": lateralVelocityPanel,
  placements: placementsPanel,
};

export interface RenderResult {
  out: string;
  columns: number;
  panels: PanelKind[];
  violations: number[][]; // per input, violating row indices
  svg: string;
}

/** Build the figure SVG from already-parsed logs. */
export function buildSvg(
  logs: { label: string; rows: LogRow[] }[],
  spec: Pick<FigureSpec, "panels" | "width" | "panelHeight">,
): string {
  const outer = 10;
  const headerH = 26;
  const W = outer * 2 + spec.width * logs.length;
  const H = outer * 2 + headerH + spec.panelHeight * spec.panels.length;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
  );
  parts.push(`<style>${STYLE}</style>`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  logs.forEach((log, c) => {
    const colX = outer + c * spec.width;
    parts.push(
      text(colX + spec.width / 2, outer + 14, log.label,
        'class="title" text-anchor="middle"'),
    );
    spec.panels.forEach((panel, r) => {
      const cell: Cell = {
        x: colX,
        y: outer + headerH + r * spec.panelHeight,
        w: spec.width,
        h: spec.panelHeight,
      };
      parts.push(`<g class="panel panel-${panel} col-${c}">`);
      parts.push(...PANEL_RENDERERS[panel](cell, log.rows, log.label));
      parts.push("</g>");
    });
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

async function writeOutput(outPath: string, svg: string): Promise<void> {
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  if (outPath.toLowerCase().endsWith(".png")) {
    let sharp: typeof import("sharp");
    try {
      sharp = require("sharp");
    } catch {
      throw new SchemaError(
        "PNG output needs the optional 'sharp' dependency; install it or use an .svg path",
      );
    }
    const buf = await sharp(Buffer.from(svg)).png().toBuffer();
    fs.writeFileSync(outPath, buf);
  } else {
    fs.writeFileSync(outPath, svg);
  }
}

/** Read the spec's inputs, render and write the figure. */
export async function renderComparison(spec: FigureSpec): Promise<RenderResult> {
  const logs = spec.inputs.map((input) => {
    let textContent: string;
    try {
      textContent = fs.readFileSync(input.csv, "utf8");
    } catch (err) {
      throw new SchemaError(`cannot read ${input.csv}: ${String(err)}`);
    }
    try {
      return { label: input.label, rows: parseLog(textContent) };
    } catch (err) {
      if (err instanceof SchemaError) {
        throw new SchemaError(`${input.csv}: ${err.message}`);
      }
      throw err;
    }
  });
  const svg = buildSvg(logs, spec);
  await writeOutput(spec.out, svg);
  return {
    out: spec.out,
    columns: logs.length,
    panels: spec.panels,
    violations: logs.map((l) => violationRows(l.rows)),
    svg,
  };
}
