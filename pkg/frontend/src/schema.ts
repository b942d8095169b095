/**
 * Fixed CSV log schema of the gait simulator.
 *
 * One row per controller tick; foot placements only on impact rows
 * (empty cells otherwise).  Fields are plain numbers or bare status
 * tokens, never quoted, so splitting on commas is exact.
 */

export const CSV_COLUMNS = [
  "t",
  "step_index",
  "stance",
  "x_c",
  "y_c",
  "L_x",
  "L_y",
  "x0_pred_xc",
  "x0_pred_yc",
  "x0_pred_Lx",
  "x0_pred_Ly",
  "k_x",
  "k_y",
  "mu_eff",
  "vx_cmd",
  "ufp_x",
  "ufp_y",
  "slip_bound_x",
  "slip_bound_y",
  "qp_status",
  "qp_iters",
  "solve_time_s",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface LogRow {
  t: number;
  step_index: number;
  stance: number;
  x_c: number;
  y_c: number;
  L_x: number;
  L_y: number;
  x0_pred_xc: number;
  x0_pred_yc: number;
  x0_pred_Lx: number;
  x0_pred_Ly: number;
  k_x: number;
  k_y: number;
  mu_eff: number;
  vx_cmd: number;
  ufp_x: number | null;
  ufp_y: number | null;
  slip_bound_x: number;
  slip_bound_y: number;
  qp_status: string;
  qp_iters: number;
  solve_time_s: number;
}

export class SchemaError extends Error {}

const OPTIONAL_FLOAT = new Set<ColumnName>(["ufp_x", "ufp_y"]);
const STRING_COLUMNS = new Set<ColumnName>(["qp_status"]);
const INT_COLUMNS = new Set<ColumnName>(["step_index", "stance", "qp_iters"]);

/** Parse log CSV text, enforcing the full fixed column schema. */
export function parseLog(text: string): LogRow[] {
  const lines = text.split("\n");
  while (lines.length && lines[lines.length - 1] === "") lines.pop();
  if (!lines.length) throw new SchemaError("empty file: missing header row");
  const header = lines[0].split(",");
  for (const col of CSV_COLUMNS) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing column '${col}' in CSV header`);
    }
  }
  if (header.length !== CSV_COLUMNS.length) {
    const extra = header.filter((h) => !(CSV_COLUMNS as readonly string[]).includes(h));
    throw new SchemaError(`unexpected columns in CSV header: ${extra.join(", ")}`);
  }
  const index = new Map<ColumnName, number>();
  for (const col of CSV_COLUMNS) index.set(col, header.indexOf(col));

  const rows: LogRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`row ${i}: expected ${header.length} cells, got ${cells.length}`);
    }
    const row: Record<string, number | string | null> = {};
    for (const col of CSV_COLUMNS) {
      const cell = cells[index.get(col)!];
      if (STRING_COLUMNS.has(col)) {
        row[col] = cell;
      } else if (cell === "") {
        if (!OPTIONAL_FLOAT.has(col)) {
          throw new SchemaError(`row ${i}: column '${col}' must not be empty`);
        }
        row[col] = null;
      } else {
        const v = INT_COLUMNS.has(col) ? parseInt(cell, 10) : parseFloat(cell);
        if (Number.isNaN(v)) {
          throw new SchemaError(`row ${i}: column '${col}' is not numeric: '${cell}'`);
        }
        row[col] = v;
      }
    }
    rows.push(row as unknown as LogRow);
  }
  return rows;
}

/** Row indices where the sagittal offset exceeds its slip bound. */
export function violationRows(rows: LogRow[]): number[] {
  const out: number[] = [];
  rows.forEach((r, i) => {
    if (Math.abs(r.x_c) > r.slip_bound_x) out.push(i);
  });
  return out;
}

/** Impact rows (those carrying an applied foot placement). */
export function impactRows(rows: LogRow[]): number[] {
  const out: number[] = [];
  rows.forEach((r, i) => {
    if (r.ufp_x !== null) out.push(i);
  });
  return out;
}

/**
 * World-frame lateral CoM position per row: the stance foot accumulates
 * the lateral placement at each impact and y_c is measured from it.
 */
export function worldLateral(rows: LogRow[]): number[] {
  let foot = 0;
  const out: number[] = [];
  for (const r of rows) {
    if (r.ufp_y !== null) foot += r.ufp_y;
    out.push(foot + r.y_c);
  }
  return out;
}

/** Per-step mean lateral velocity, one entry per completed step. */
export function stepLateralVelocity(
  rows: LogRow[],
): { t0: number; t1: number; v: number }[] {
  const world = worldLateral(rows);
  const impacts = impactRows(rows);
  const out: { t0: number; t1: number; v: number }[] = [];
  let prevIdx = 0;
  for (const idx of impacts) {
    const dt = rows[idx].t - rows[prevIdx].t;
    if (dt > 0) {
      out.push({
        t0: rows[prevIdx].t,
        t1: rows[idx].t,
        v: (world[idx] - world[prevIdx]) / dt,
      });
    }
    prevIdx = idx;
  }
  return out;
}
