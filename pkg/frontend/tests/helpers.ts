import { CSV_COLUMNS } from "../src/schema";

export function makeCsv(
  rows: Array<Partial<Record<(typeof CSV_COLUMNS)[number], number | string | null>>>,
): string {
  const defaults: Record<string, number | string | null> = {
    t: 0,
    step_index: 0,
    stance: 1,
    x_c: 0,
    y_c: -0.15,
    L_x: 0,
    L_y: 0,
    x0_pred_xc: 0,
    x0_pred_yc: 0,
    x0_pred_Lx: 0,
    x0_pred_Ly: 0,
    k_x: 0,
    k_y: 0,
    mu_eff: 0.42,
    vx_cmd: 0,
    ufp_x: null,
    ufp_y: null,
    slip_bound_x: 0.339,
    slip_bound_y: 0.339,
    qp_status: "optimal",
    qp_iters: 1,
    solve_time_s: 0,
  };
  const lines = [CSV_COLUMNS.join(",")];
  rows.forEach((over, i) => {
    const row = { ...defaults, t: 0.004 * i, ...over };
    lines.push(
      CSV_COLUMNS.map((c) => {
        const v = row[c];
        return v === null ? "" : String(v);
      }).join(","),
    );
  });
  return lines.join("\n") + "\n";
}
