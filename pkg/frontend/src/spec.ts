/**
 * Figure specification: which measure to draw from a results CSV, how
 * to narrow the rows, and where to write the image.
 *
 * JSON shape (all selector fields optional):
 *
 *     {
 *       "kind": "ber",                       // or "sumrate" | "eigmetric"
 *       "input_csv": "results.csv",
 *       "output_image": "fig.svg",
 *       "title": "BER, K = 4",
 *       "filter": {
 *         "schemes": ["P_SVD_STAR_MMSE_STAR"],
 *         "detectors": ["mdd", "amdd"],      // "-" selects detector-less rows
 *         "config_hash": "ab12..."           // pick one run out of a pooled CSV
 *       }
 *     }
 *
 * Unknown keys are rejected so typos fail loudly.
 */

import type { ResultRow } from "./csv.js";

export type FigureKind = "eigmetric" | "sumrate" | "ber";

const KINDS: readonly FigureKind[] = ["eigmetric", "sumrate", "ber"];

export interface FigureFilter {
  schemes?: string[];
  detectors?: string[];
  configHash?: string;
}

export interface FigureSpec {
  kind: FigureKind;
  inputCsv: string;
  outputImage: string;
  title?: string;
  filter: FigureFilter;
}

/** Figure spec JSON is malformed. */
export class SpecError extends Error {
  override name = "SpecError";
}

function asRecord(value: unknown, what: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SpecError(`${what} must be a JSON object`);
  }
  return value as Record<string, unknown>;
}

function asString(value: unknown, what: string): string {
  if (typeof value !== "string" || value === "") {
    throw new SpecError(`${what} must be a non-empty string`);
  }
  return value;
}

function asStringArray(value: unknown, what: string): string[] {
  if (!Array.isArray(value) || value.length === 0 ||
      value.some((v) => typeof v !== "string" || v === "")) {
    throw new SpecError(`${what} must be a non-empty array of strings`);
  }
  return value as string[];
}

function rejectUnknownKeys(
  record: Record<string, unknown>,
  allowed: readonly string[],
  what: string,
): void {
  for (const key of Object.keys(record)) {
    if (!allowed.includes(key)) {
      throw new SpecError(`unknown key '${key}' in ${what}`);
    }
  }
}

/** Validate a parsed JSON value into a FigureSpec. */
export function parseFigureSpec(json: unknown): FigureSpec {
  const root = asRecord(json, "figure spec");
  rejectUnknownKeys(
    root,
    ["kind", "input_csv", "output_image", "title", "filter"],
    "figure spec",
  );
  const kind = asString(root["kind"], "'kind'") as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new SpecError(
      `'kind' must be one of ${KINDS.join(", ")}; got '${kind}'`,
    );
  }
  const spec: FigureSpec = {
    kind,
    inputCsv: asString(root["input_csv"], "'input_csv'"),
    outputImage: asString(root["output_image"], "'output_image'"),
    filter: {},
  };
  if (root["title"] !== undefined) {
    spec.title = asString(root["title"], "'title'");
  }
  if (root["filter"] !== undefined) {
    const filter = asRecord(root["filter"], "'filter'");
    rejectUnknownKeys(
      filter,
      ["schemes", "detectors", "config_hash"],
      "'filter'",
    );
    if (filter["schemes"] !== undefined) {
      spec.filter.schemes = asStringArray(filter["schemes"], "'schemes'");
    }
    if (filter["detectors"] !== undefined) {
      spec.filter.detectors = asStringArray(
        filter["detectors"],
        "'detectors'",
      );
    }
    if (filter["config_hash"] !== undefined) {
      spec.filter.configHash = asString(filter["config_hash"], "'config_hash'");
    }
  }
  return spec;
}

/**
 * Apply the spec's selectors.  Rows come back in file order; the
 * detector selector treats "-" as the name of detector-less rows.
 */
export function filterRows(
  rows: readonly ResultRow[],
  filter: FigureFilter,
): ResultRow[] {
  return rows.filter((row) => {
    if (filter.schemes !== undefined && !filter.schemes.includes(row.scheme)) {
      return false;
    }
    if (filter.detectors !== undefined &&
        !filter.detectors.includes(row.detector ?? "-")) {
      return false;
    }
    if (filter.configHash !== undefined &&
        row.configHash !== filter.configHash) {
      return false;
    }
    return true;
  });
}
