#!/usr/bin/env node
/**
 * render — comparison figures from simulator CSV logs.
 *
 * Usage:
 *   alip-mpc-plots render --spec figure.json
 *   alip-mpc-plots render --csv a.csv --csv b.csv --out fig.svg
 *                         [--label A --label B] [--panels offsets,placements]
 *
 * Exit codes: 0 on success (including empty logs), 1 on usage or schema
 * errors.
 */

import * as fs from "fs";

import {
  DEFAULT_PANEL_HEIGHT,
  DEFAULT_WIDTH,
  PANEL_KINDS,
  validateSpec,
} from "./figure";
import { renderComparison } from "./render";
import { SchemaError } from "./schema";

interface Args {
  spec?: string;
  csv: string[];
  label: string[];
  out?: string;
  panels?: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { csv: [], label: [] };
  let i = 0;
  if (argv[0] === "render") i = 1;
  for (; i < argv.length; i++) {
    const flag = argv[i];
    const need = (): string => {
      const v = argv[++i];
      if (v === undefined) throw new SchemaError(`missing value for ${flag}`);
      return v;
    };
    switch (flag) {
      case "--spec":
        args.spec = need();
        break;
      case "--csv":
        args.csv.push(need());
        break;
      case "--label":
        args.label.push(need());
        break;
      case "--out":
        args.out = need();
        break;
      case "--panels":
        args.panels = need();
        break;
      case "--help":
      case "-h":
        printUsage();
        process.exit(0);
        break;
      default:
        throw new SchemaError(`unknown argument '${flag}'`);
    }
  }
  return args;
}

function printUsage(): void {
  process.stdout.write(
    "usage: render --spec <file.json>\n" +
      "       render --csv a.csv [--csv b.csv ...] --out fig.svg\n" +
      `              [--label NAME ...] [--panels ${PANEL_KINDS.join(",")}]\n`,
  );
}

async function main(): Promise<number> {
  const args = parseArgs(process.argv.slice(2));
  let rawSpec: unknown;
  if (args.spec !== undefined) {
    if (args.csv.length || args.out) {
      throw new SchemaError("--spec cannot be combined with --csv/--out");
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(fs.readFileSync(args.spec, "utf8"));
    } catch (err) {
      throw new SchemaError(`cannot read figure spec ${args.spec}: ${String(err)}`);
    }
    rawSpec = parsed;
  } else {
    if (!args.csv.length) {
      printUsage();
      throw new SchemaError("need --spec or at least one --csv");
    }
    if (!args.out) throw new SchemaError("need --out with --csv");
    if (args.label.length && args.label.length !== args.csv.length) {
      throw new SchemaError("--label count must match --csv count");
    }
    rawSpec = {
      inputs: args.csv.map((csv, i) => ({
        csv,
        label: args.label[i] ?? csv,
      })),
      out: args.out,
      panels: args.panels ? args.panels.split(",") : undefined,
      width: DEFAULT_WIDTH,
      panelHeight: DEFAULT_PANEL_HEIGHT,
    };
  }
  const spec = validateSpec(rawSpec);
  const result = await renderComparison(spec);
  process.stdout.write(
    `wrote ${result.out}: ${result.columns} column(s) x ${result.panels.length} panel(s)\n`,
  );
  result.violations.forEach((v, i) => {
    process.stdout.write(
      `  ${spec.inputs[i].label}: ${v.length} slip-violation marker(s)\n`,
    );
  });
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    if (err instanceof SchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
    } else {
      process.stderr.write(`error: ${String(err?.stack ?? err)}\n`);
    }
    process.exit(1);
  });
