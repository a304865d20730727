import Papa from "papaparse";

export class SchemaError extends Error {}

export const TRIAL_COLUMNS = [
  "trial",
  "method",
  "pre_value",
  "post_value",
  "ratio",
  "rounds",
  "oracle_calls",
  "k",
  "n",
  "seed",
] as const;

export interface TrialRow {
  trial: number;
  method: string;
  pre_value: number;
  post_value: number;
  ratio: number | null;
  rounds: number | null;
  oracle_calls: number | null;
  k: number;
  n: number;
  seed: number;
}

function requireNumber(raw: string, column: string, line: number): number {
  const v = Number(raw);
  if (raw === "" || !Number.isFinite(v)) {
    throw new SchemaError(`row ${line}: column "${column}" is not a number: ${JSON.stringify(raw)}`);
  }
  return v;
}

function optionalNumber(raw: string, column: string, line: number): number | null {
  if (raw === "" || raw === undefined) return null;
  return requireNumber(raw, column, line);
}

export function parseTrialsCsv(text: string, source: string): TrialRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${source}: ${e.message} (row ${e.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of TRIAL_COLUMNS) {
    if (!fields.includes(column)) {
      throw new SchemaError(`${source}: missing required column "${column}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }
  return parsed.data.map((row, i) => ({
    trial: requireNumber(row.trial, "trial", i + 2),
    method: row.method,
    pre_value: requireNumber(row.pre_value, "pre_value", i + 2),
    post_value: requireNumber(row.post_value, "post_value", i + 2),
    ratio: optionalNumber(row.ratio, "ratio", i + 2),
    rounds: optionalNumber(row.rounds, "rounds", i + 2),
    oracle_calls: optionalNumber(row.oracle_calls, "oracle_calls", i + 2),
    k: requireNumber(row.k, "k", i + 2),
    n: requireNumber(row.n, "n", i + 2),
    seed: requireNumber(row.seed, "seed", i + 2),
  }));
}

export const TRACE_KEYS = ["round", "phase", "robot", "role", "alpha", "s1", "s2", "utility"] as const;

export interface TraceRecord {
  round: number;
  phase: number;
  robot: number;
  role: string | null;
  alpha: number;
  s1: number[];
  s2: [number, number, number][];
  utility: number;
}

export function parseTraceJsonl(text: string, source: string): TraceRecord[] {
  const records: TraceRecord[] = [];
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new SchemaError(`${source}: no records`);
  }
  lines.forEach((line, i) => {
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch (e) {
      throw new SchemaError(`${source}: line ${i + 1} is not valid JSON`);
    }
    for (const key of TRACE_KEYS) {
      if (!(key in obj)) {
        throw new SchemaError(`${source}: line ${i + 1} is missing required key "${key}"`);
      }
    }
    records.push(obj as unknown as TraceRecord);
  });
  return records;
}

export function methodsInOrder(rows: TrialRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.method)) seen.push(row.method);
  }
  return seen;
}
