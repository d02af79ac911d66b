import {
  PROTOCOL_NAME,
  SEMANTICS,
  SIDECAR_NAME,
  SIDECAR_VERSION,
  type Semantics,
  type SidecarConfig,
} from "./config.js";
import { lexicalOverlap, overlapPerplexity, type ScoreTable } from "./scorers.js";

export interface ServerIO {
  lines: AsyncIterable<string>;
  /** Receives one response line at a time, without the trailing newline. */
  write: (line: string) => void;
}

function parseHandshake(line: string): Semantics | null {
  const parts = line.split(" ");
  if (parts.length !== 3 || parts[0] !== "HELLO" || parts[1] !== PROTOCOL_NAME) {
    return null;
  }
  const match = /^score=(.+)$/.exec(parts[2]);
  if (match === null) return null;
  const semantics = match[1];
  return (SEMANTICS as readonly string[]).includes(semantics)
    ? (semantics as Semantics)
    : null;
}

function inRange(score: number, semantics: Semantics): boolean {
  return semantics === "parallelism" ? score >= 0 && score <= 1 : score > 0;
}

/**
 * Serve the line protocol until BYE or end of input.
 *
 * Exit status: 0 after a clean BYE or EOF, 3 when the handshake is not
 * recognized. Malformed requests get an ERR line and service continues.
 */
export async function serve(
  config: SidecarConfig,
  table: ScoreTable | null,
  io: ServerIO,
): Promise<number> {
  let semantics: Semantics | null = null;
  const pending: string[] = [];

  const flush = () => {
    // reversing each full window exercises out-of-order reassembly downstream
    while (pending.length > 0) io.write(pending.pop() as string);
  };

  for await (const raw of io.lines) {
    const line = raw.replace(/\r$/, "");
    if (semantics === null) {
      semantics = parseHandshake(line);
      if (semantics === null) return 3;
      io.write(`OK ${SIDECAR_NAME}/${SIDECAR_VERSION}`);
      continue;
    }
    if (line === "BYE") {
      flush();
      return 0;
    }

    const cols = line.split("\t");
    const idText = cols[0] === "" || cols[0] === undefined ? "-" : cols[0];
    if (cols.length !== 3) {
      io.write(`ERR ${idText} expected id<TAB>source<TAB>target`);
      continue;
    }
    const id = Number(cols[0]);
    if (!Number.isSafeInteger(id)) {
      io.write(`ERR ${idText} id is not an integer`);
      continue;
    }

    let score: number;
    if (config.mode === "echo-file") {
      const entry = (table as ScoreTable).get(id);
      if (entry === undefined) {
        io.write(`ERR ${id} no table entry for id`);
        continue;
      }
      score = entry;
    } else if (semantics === "parallelism") {
      // a neural pair scorer would replace this lexical stand-in
      score = lexicalOverlap(cols[1], cols[2]);
    } else {
      score = overlapPerplexity(cols[1], cols[2]);
    }

    if (!inRange(score, semantics)) {
      io.write(`ERR ${id} score ${score} out of range for ${semantics}`);
      continue;
    }

    const response = `${id}\t${score.toFixed(6)}`;
    if (config.shuffleWindow > 0) {
      pending.push(response);
      if (pending.length >= config.shuffleWindow) flush();
    } else {
      io.write(response);
    }
  }
  flush();
  return 0;
}
