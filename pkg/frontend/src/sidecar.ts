#!/usr/bin/env node
/**
 * Reference external scorer for the bitext-sieve pipeline.
 *
 * Usage: sidecar --mode lexical-overlap [--shuffle]
 *        sidecar --mode echo-file --table scores.tsv [--shuffle]
 *
 * Speaks the line protocol on stdin/stdout: a HELLO handshake, then one
 * id<TAB>source<TAB>target request per line answered by id<TAB>score,
 * until BYE. Exit codes: 0 clean shutdown, 1 usage, 2 unreadable table,
 * 3 unrecognized handshake.
 */

import { createInterface } from "node:readline";

import { DataError, parseArgs, UsageError, type SidecarConfig } from "./config.js";
import { loadTable, type ScoreTable } from "./scorers.js";
import { serve } from "./server.js";

async function main(): Promise<number> {
  let config: SidecarConfig;
  let table: ScoreTable | null = null;
  try {
    config = parseArgs(process.argv.slice(2));
    if (config.mode === "echo-file") {
      table = loadTable(config.tablePath as string);
    }
  } catch (err) {
    if (err instanceof UsageError || err instanceof DataError) {
      process.stderr.write(`sidecar: error: ${err.message}\n`);
      return err instanceof UsageError ? 1 : 2;
    }
    throw err;
  }

  const lines = createInterface({ input: process.stdin, crlfDelay: Infinity });
  try {
    return await serve(config, table, {
      lines,
      write: (line) => process.stdout.write(line + "\n"),
    });
  } finally {
    lines.close();
    process.stdin.destroy();
  }
}

main().then(
  (code) =>
    // let stdout drain before carrying the status out
    new Promise<void>(() => process.stdout.write("", () => process.exit(code))),
  (err) => {
    process.stderr.write(`sidecar: fatal: ${err?.stack ?? err}\n`);
    process.exit(70);
  },
);
