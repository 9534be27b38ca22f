#!/usr/bin/env node
/**
 * Figure-plotting command line:
 *
 *     hbfsim-plot plot --spec figure.json
 *
 * The spec names the input CSV, the figure kind, row selectors, and the
 * output image path (see spec.ts for the JSON shape).  Exit codes: 0
 * success; 1 bad spec, bad CSV schema, or nothing to draw after
 * filtering; 2 I/O or unexpected failure.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { parseResultsCsv, SchemaError } from "./csv.js";
import { NoDataError, renderFigure } from "./render.js";
import { filterRows, parseFigureSpec, SpecError } from "./spec.js";

const USAGE = "usage: hbfsim-plot plot --spec <figure.json>";

/** Render one figure per the spec file; returns the output path. */
export function runPlot(specPath: string): string {
  let rawSpec: string;
  try {
    rawSpec = readFileSync(specPath, "utf8");
  } catch (err) {
    throw new SpecError(
      `cannot read spec file ${specPath}: ${(err as Error).message}`,
    );
  }
  let json: unknown;
  try {
    json = JSON.parse(rawSpec);
  } catch (err) {
    throw new SpecError(`spec file is not valid JSON: ${(err as Error).message}`);
  }
  const spec = parseFigureSpec(json);

  let rawCsv: string;
  try {
    rawCsv = readFileSync(spec.inputCsv, "utf8");
  } catch (err) {
    throw new Error(`cannot read CSV ${spec.inputCsv}: ${(err as Error).message}`);
  }
  const rows = filterRows(parseResultsCsv(rawCsv), spec.filter);
  const svg = renderFigure(spec.kind, rows, spec.title);
  writeFileSync(spec.outputImage, svg);
  return spec.outputImage;
}

export function main(argv: string[]): number {
  let parsed: { values: { spec?: string }; positionals: string[] };
  try {
    parsed = parseArgs({
      args: argv,
      options: { spec: { type: "string" } },
      allowPositionals: true,
    });
  } catch (err) {
    console.error((err as Error).message);
    console.error(USAGE);
    return 1;
  }
  const [command, ...extra] = parsed.positionals;
  if (command !== "plot" || extra.length > 0 || parsed.values.spec === undefined) {
    console.error(USAGE);
    return 1;
  }
  try {
    const out = runPlot(parsed.values.spec);
    console.log(out);
    return 0;
  } catch (err) {
    if (
      err instanceof SpecError ||
      err instanceof SchemaError ||
      err instanceof NoDataError
    ) {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

process.exit(main(process.argv.slice(2)));
