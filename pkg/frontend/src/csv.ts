/**
 * Strict reader for the simulator's results CSV.
 *
 * The schema is a fixed 13-column header; rows carry one
 * (scheme, detector, SNR) cell each.  Detector is "-" on rows produced
 * without a detection stage.  Floats are written by Python's repr, so
 * "nan", "inf" and "-inf" are legal cell values.
 *
 * Parsing is deliberately unforgiving: a missing or reordered column is
 * a SchemaError naming the column, and every cell must parse as its
 * declared type.  The renderer downstream never recomputes metrics, so
 * bad input must stop here.
 */

export const CSV_HEADER =
  "scheme,detector,snr_db,trials,eig_metric_mean,sum_rate_mean," +
  "bits_sent,bit_errors,ber,ber_ci_low,ber_ci_high,fail_count,config_hash";

export const COLUMNS: readonly string[] = CSV_HEADER.split(",");

export interface ResultRow {
  scheme: string;
  /** null on rows written without a detection stage ("-" in the file). */
  detector: string | null;
  snrDb: number;
  trials: number;
  eigMetricMean: number;
  sumRateMean: number;
  bitsSent: number;
  bitErrors: number;
  ber: number;
  berCiLow: number;
  berCiHigh: number;
  failCount: number;
  configHash: string;
}

/** Input violates the results-CSV schema. */
export class SchemaError extends Error {
  override name = "SchemaError";
}

function parseFloatCell(raw: string, column: string, line: number): number {
  if (raw === "nan") return NaN;
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  if (raw === "" || raw === undefined) {
    throw new SchemaError(`line ${line}: empty value in column '${column}'`);
  }
  const value = Number(raw);
  if (Number.isNaN(value)) {
    throw new SchemaError(
      `line ${line}: bad float ${JSON.stringify(raw)} in column '${column}'`,
    );
  }
  return value;
}

function parseIntCell(raw: string, column: string, line: number): number {
  const value = parseFloatCell(raw, column, line);
  if (!Number.isInteger(value) || value < 0) {
    throw new SchemaError(
      `line ${line}: column '${column}' must be a non-negative integer, ` +
        `got ${JSON.stringify(raw)}`,
    );
  }
  return value;
}

function checkHeader(headerLine: string): void {
  if (headerLine === CSV_HEADER) return;
  const found = headerLine.split(",").map((c) => c.trim());
  for (const column of COLUMNS) {
    if (!found.includes(column)) {
      throw new SchemaError(`missing column '${column}'`);
    }
  }
  for (const column of found) {
    if (!COLUMNS.includes(column)) {
      throw new SchemaError(`unknown column '${column}'`);
    }
  }
  throw new SchemaError(
    `columns out of order: expected '${CSV_HEADER}', got '${headerLine}'`,
  );
}

/**
 * Parse a full results CSV.  Returns rows in file order.
 *
 * Throws SchemaError on any deviation from the schema; an empty file
 * (no header) is also a SchemaError.  A header with zero data rows is
 * legal and returns [].
 */
export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/);
  // drop trailing blank lines from the final newline
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new SchemaError("empty file: missing header");
  }
  checkHeader(lines[0]!);

  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const cells = lines[i]!.split(",");
    if (cells.length !== COLUMNS.length) {
      throw new SchemaError(
        `line ${lineNo}: expected ${COLUMNS.length} fields, got ${cells.length}`,
      );
    }
    const [
      scheme,
      detector,
      snrDb,
      trials,
      eigMetricMean,
      sumRateMean,
      bitsSent,
      bitErrors,
      ber,
      berCiLow,
      berCiHigh,
      failCount,
      configHash,
    ] = cells as [
      string, string, string, string, string, string, string,
      string, string, string, string, string, string,
    ];
    if (scheme === "") {
      throw new SchemaError(`line ${lineNo}: empty value in column 'scheme'`);
    }
    if (configHash === "") {
      throw new SchemaError(
        `line ${lineNo}: empty value in column 'config_hash'`,
      );
    }
    rows.push({
      scheme,
      detector: detector === "-" ? null : detector,
      snrDb: parseFloatCell(snrDb, "snr_db", lineNo),
      trials: parseIntCell(trials, "trials", lineNo),
      eigMetricMean: parseFloatCell(eigMetricMean, "eig_metric_mean", lineNo),
      sumRateMean: parseFloatCell(sumRateMean, "sum_rate_mean", lineNo),
      bitsSent: parseIntCell(bitsSent, "bits_sent", lineNo),
      bitErrors: parseIntCell(bitErrors, "bit_errors", lineNo),
      ber: parseFloatCell(ber, "ber", lineNo),
      berCiLow: parseFloatCell(berCiLow, "ber_ci_low", lineNo),
      berCiHigh: parseFloatCell(berCiHigh, "ber_ci_high", lineNo),
      failCount: parseIntCell(failCount, "fail_count", lineNo),
      configHash,
    });
  }
  return rows;
}
