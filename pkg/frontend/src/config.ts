export const SIDECAR_NAME = "refscorer";
export const SIDECAR_VERSION = "1";
export const PROTOCOL_NAME = "bitext-sieve/1";

export const MODES = ["echo-file", "lexical-overlap"] as const;
export type Mode = (typeof MODES)[number];

export const SEMANTICS = ["parallelism", "perplexity"] as const;
export type Semantics = (typeof SEMANTICS)[number];

/** Responses buffered and flushed in reverse, to exercise client reassembly. */
export const SHUFFLE_WINDOW = 8;

export interface SidecarConfig {
  readonly mode: Mode;
  /** id -> score table, required by echo-file mode. */
  readonly tablePath: string | null;
  /** 0 answers in request order; > 0 reverses every full window. */
  readonly shuffleWindow: number;
}

export class UsageError extends Error {}

export class DataError extends Error {}

export function parseArgs(argv: readonly string[]): SidecarConfig {
  let mode: string | null = null;
  let tablePath: string | null = null;
  let shuffleWindow = 0;

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--mode") {
      mode = argv[++i] ?? null;
      if (mode === null) throw new UsageError("--mode needs a value");
    } else if (arg === "--table") {
      tablePath = argv[++i] ?? null;
      if (tablePath === null) throw new UsageError("--table needs a path");
    } else if (arg === "--shuffle") {
      shuffleWindow = SHUFFLE_WINDOW;
    } else {
      throw new UsageError(`unknown argument: ${arg}`);
    }
  }

  if (mode === null) {
    throw new UsageError("--mode is required (echo-file or lexical-overlap)");
  }
  if (!(MODES as readonly string[]).includes(mode)) {
    throw new UsageError(`unknown mode: ${mode}`);
  }
  if (mode === "echo-file" && tablePath === null) {
    throw new UsageError("echo-file mode requires --table");
  }
  if (mode === "lexical-overlap" && tablePath !== null) {
    throw new UsageError("--table only applies to echo-file mode");
  }

  return { mode: mode as Mode, tablePath, shuffleWindow };
}
