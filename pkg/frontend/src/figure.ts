/** Figure specification: which logs, which panels, where to write. */

import { SchemaError, type ColumnName } from "./schema";

export type PanelKind = "offsets" | "lateral-velocity" | "placements";

export const PANEL_KINDS: PanelKind[] = ["offsets", "lateral-velocity", "placements"];

/** Columns each panel reads; validated against the fixed schema. */
export const PANEL_COLUMNS: Record<PanelKind, ColumnName[]> = {
  offsets: ["t", "x_c", "y_c", "slip_bound_x", "slip_bound_y"],
  "lateral-velocity": ["t", "y_c", "ufp_y"],
  placements: ["t", "step_index", "ufp_x", "ufp_y"],
};

export interface FigureInput {
  csv: string;
  label: string;
}

export interface FigureSpec {
  inputs: FigureInput[];
  out: string;
  panels: PanelKind[];
  width: number;
  panelHeight: number;
}

export const DEFAULT_WIDTH = 560;
export const DEFAULT_PANEL_HEIGHT = 220;

export function validateSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null) {
    throw new SchemaError("figure spec must be an object");
  }
  const spec = raw as Record<string, unknown>;
  const known = new Set(["inputs", "out", "panels", "width", "panelHeight"]);
  for (const key of Object.keys(spec)) {
    if (!known.has(key)) throw new SchemaError(`unknown figure spec key '${key}'`);
  }
  const inputs = spec.inputs;
  if (!Array.isArray(inputs) || inputs.length === 0) {
    throw new SchemaError("figure spec needs a non-empty 'inputs' list");
  }
  const parsedInputs: FigureInput[] = inputs.map((entry, i) => {
    if (typeof entry !== "object" || entry === null) {
      throw new SchemaError(`inputs[${i}] must be an object`);
    }
    const e = entry as Record<string, unknown>;
    if (typeof e.csv !== "string" || !e.csv) {
      throw new SchemaError(`inputs[${i}].csv must be a path`);
    }
    const label = e.label === undefined ? e.csv : e.label;
    if (typeof label !== "string") {
      throw new SchemaError(`inputs[${i}].label must be a string`);
    }
    return { csv: e.csv, label };
  });
  if (typeof spec.out !== "string" || !spec.out) {
    throw new SchemaError("figure spec needs an 'out' path");
  }
  let panels: PanelKind[] = PANEL_KINDS;
  if (spec.panels !== undefined) {
    if (!Array.isArray(spec.panels) || spec.panels.length === 0) {
      throw new SchemaError("'panels' must be a non-empty list");
    }
    panels = spec.panels.map((p) => {
      if (typeof p !== "string" || !(PANEL_KINDS as string[]).includes(p)) {
        throw new SchemaError(
          `unknown panel '${String(p)}'; known: ${PANEL_KINDS.join(", ")}`,
        );
      }
      return p as PanelKind;
    });
  }
  const width = spec.width === undefined ? DEFAULT_WIDTH : Number(spec.width);
  const panelHeight =
    spec.panelHeight === undefined ? DEFAULT_PANEL_HEIGHT : Number(spec.panelHeight);
  if (!Number.isFinite(width) || width < 100) {
    throw new SchemaError("'width' must be a number >= 100");
  }
  if (!Number.isFinite(panelHeight) || panelHeight < 80) {
    throw new SchemaError("'panelHeight' must be a number >= 80");
  }
  return { inputs: parsedInputs, out: spec.out, panels, width, panelHeight };
}
