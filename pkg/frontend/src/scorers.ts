import { readFileSync } from "node:fs";

import { DataError } from "./config.js";

function tokens(text: string): Set<string> {
  return new Set(text.split(/\s+/).filter((t) => t.length > 0));
}

/** Jaccard overlap of the two token sets, in [0, 1]. Empty union scores 0. */
export function lexicalOverlap(source: string, target: string): number {
  const a = tokens(source);
  const b = tokens(target);
  const union = new Set([...a, ...b]);
  if (union.size === 0) return 0;
  let shared = 0;
  for (const t of a) if (b.has(t)) shared++;
  return shared / union.size;
}

/**
 * Perplexity-shaped stand-in derived from overlap: 1 for identical token
 * sets, 11 for disjoint ones. Always >= 1, as the semantics require.
 */
export function overlapPerplexity(source: string, target: string): number {
  return 1 + 10 * (1 - lexicalOverlap(source, target));
}

export type ScoreTable = ReadonlyMap<number, number>;

export function parseTable(text: string): ScoreTable {
  const table = new Map<number, number>();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") continue;
    const cols = line.split("\t");
    const id = Number(cols[0]);
    const score = Number(cols[1]);
    if (cols.length !== 2 || !Number.isInteger(id) || !Number.isFinite(score)) {
      throw new DataError(`line ${i + 1}: expected id<TAB>score, got ${JSON.stringify(line)}`);
    }
    if (table.has(id)) {
      throw new DataError(`line ${i + 1}: duplicate id ${id}`);
    }
    table.set(id, score);
  }
  return table;
}

export function loadTable(path: string): ScoreTable {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new DataError(`cannot read score table ${path}: ${(err as Error).message}`);
  }
  return parseTable(text);
}
