#!/usr/bin/env node
/**
 * Render figures from rescover experiment outputs.
 *
 *   plots <box|hist|bars|trace> --in <path> --out <path.svg>
 *
 * box / hist / bars read a trials.csv, trace reads a trace.jsonl.
 * Exits non-zero with a descriptive message on schema mismatches.
 */

import { readFileSync, writeFileSync } from "fs";

import { SchemaError, parseTraceJsonl, parseTrialsCsv } from "./data.js";
import { boxPlot, meanUtilityBars, ratioHistogram, utilityTrace } from "./figures.js";

export const KINDS = ["box", "hist", "bars", "trace"] as const;
export type Kind = (typeof KINDS)[number];

const USAGE = `usage: plots <${KINDS.join("|")}> --in <path> --out <path.svg>`;

export function render(kind: Kind, inputText: string, source: string): string {
  if (kind === "trace") {
    return utilityTrace(parseTraceJsonl(inputText, source));
  }
  const rows = parseTrialsCsv(inputText, source);
  if (kind === "box") return boxPlot(rows);
  if (kind === "hist") return ratioHistogram(rows);
  return meanUtilityBars(rows);
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  if (!kind || !(KINDS as readonly string[]).includes(kind)) {
    console.error(USAGE);
    return 2;
  }
  let input: string | undefined;
  let output: string | undefined;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--in") input = args.shift();
    else if (flag === "--out") output = args.shift();
    else {
      console.error(`unknown argument: ${flag}\n${USAGE}`);
      return 2;
    }
  }
  if (!input || !output) {
    console.error(USAGE);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(input, "utf8");
  } catch (e) {
    console.error(`cannot read ${input}: ${(e as Error).message}`);
    return 1;
  }
  try {
    writeFileSync(output, render(kind as Kind, text, input));
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
      return 1;
    }
    throw e;
  }
  console.log(`wrote ${output}`);
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
