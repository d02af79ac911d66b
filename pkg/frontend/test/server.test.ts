import { describe, expect, it } from "vitest";

import { type SidecarConfig } from "../src/config.js";
import { parseTable } from "../src/scorers.js";
import { serve, type ServerIO } from "../src/server.js";

const OVERLAP: SidecarConfig = {
  mode: "lexical-overlap",
  tablePath: null,
  shuffleWindow: 0,
};

const HELLO = "HELLO bitext-sieve/1 score=parallelism";

async function drive(
  config: SidecarConfig,
  lines: string[],
  table: string | null = null,
): Promise<{ code: number; out: string[] }> {
  const out: string[] = [];
  const io: ServerIO = {
    lines: (async function* () {
      yield* lines;
    })(),
    write: (line) => out.push(line),
  };
  const code = await serve(config, table === null ? null : parseTable(table), io);
  return { code, out };
}

describe("handshake", () => {
  it("answers the protocol constant", async () => {
    const { code, out } = await drive(OVERLAP, [HELLO, "BYE"]);
    expect(out[0]).toBe("OK refscorer/1");
    expect(code).toBe(0);
  });

  it("exits 3 on an unknown handshake", async () => {
    for (const bad of [
      "HELLO other-tool/1 score=parallelism",
      "HELLO bitext-sieve/2 score=parallelism",
      "HELLO bitext-sieve/1 score=bleu",
      "HELLO bitext-sieve/1",
      "7\ta\tb",
    ]) {
      const { code, out } = await drive(OVERLAP, [bad]);
      expect(code).toBe(3);
      expect(out).toEqual([]);
    }
  });
});

describe("lexical-overlap mode", () => {
  it("answers every id exactly once, in order", async () => {
    const { code, out } = await drive(OVERLAP, [
      HELLO,
      "0\ta b\ta b",
      "1\ta b\tx y",
      "2\ta b\tb c",
      "BYE",
    ]);
    expect(code).toBe(0);
    expect(out.slice(1)).toEqual(["0\t1.000000", "1\t0.000000", "2\t0.333333"]);
  });

  it("serves perplexity semantics with scores >= 1", async () => {
    const { out } = await drive(OVERLAP, [
      "HELLO bitext-sieve/1 score=perplexity",
      "0\ta\ta",
      "1\ta\tz",
      "BYE",
    ]);
    expect(out.slice(1)).toEqual(["0\t1.000000", "1\t11.000000"]);
  });

  it("flags malformed requests and keeps serving", async () => {
    const { code, out } = await drive(OVERLAP, [
      HELLO,
      "7\tmissing-target",
      "x\ta\tb",
      "1\ta\ta",
      "BYE",
    ]);
    expect(code).toBe(0);
    expect(out[1]).toMatch(/^ERR 7 /);
    expect(out[2]).toMatch(/^ERR x /);
    expect(out[3]).toBe("1\t1.000000");
  });
});

describe("echo-file mode", () => {
  const ECHO: SidecarConfig = { mode: "echo-file", tablePath: "t", shuffleWindow: 0 };

  it("replays the table with six decimals", async () => {
    const { out } = await drive(ECHO, [HELLO, "7\ta\tb", "BYE"], "7\t0.42\n");
    expect(out[1]).toBe("7\t0.420000");
  });

  it("flags ids missing from the table and keeps serving", async () => {
    const { code, out } = await drive(
      ECHO,
      [HELLO, "9\ta\tb", "7\ta\tb", "BYE"],
      "7\t0.42\n",
    );
    expect(code).toBe(0);
    expect(out[1]).toBe("ERR 9 no table entry for id");
    expect(out[2]).toBe("7\t0.420000");
  });

  it("flags table scores outside the declared semantics", async () => {
    const { out } = await drive(ECHO, [HELLO, "7\ta\tb", "BYE"], "7\t1.5\n");
    expect(out[1]).toMatch(/^ERR 7 /);
  });

  it("accepts unbounded scores under perplexity semantics", async () => {
    const { out } = await drive(
      ECHO,
      ["HELLO bitext-sieve/1 score=perplexity", "7\ta\tb", "BYE"],
      "7\t1.5\n",
    );
    expect(out[1]).toBe("7\t1.500000");
  });
});

describe("shuffled responses", () => {
  const SHUFFLED: SidecarConfig = {
    mode: "lexical-overlap",
    tablePath: null,
    shuffleWindow: 3,
  };

  it("reverses each full window and flushes the rest at BYE", async () => {
    const requests = [0, 1, 2, 3, 4, 5, 6].map((i) => `${i}\ta\ta`);
    const { out } = await drive(SHUFFLED, [HELLO, ...requests, "BYE"]);
    const ids = out.slice(1).map((line) => Number(line.split("\t")[0]));
    expect(ids).toEqual([2, 1, 0, 5, 4, 3, 6]);
  });

  it("still answers every id exactly once", async () => {
    const requests = Array.from({ length: 20 }, (_, i) => `${i}\ta b\tb c`);
    const { out } = await drive(SHUFFLED, [HELLO, ...requests, "BYE"]);
    const ids = out.slice(1).map((line) => Number(line.split("\t")[0]));
    expect([...ids].sort((a, b) => a - b)).toEqual([...Array(20).keys()]);
  });
});

describe("shutdown", () => {
  it("treats end of input as a clean stop", async () => {
    const { code, out } = await drive(OVERLAP, [HELLO, "0\ta\ta"]);
    expect(code).toBe(0);
    expect(out.slice(1)).toEqual(["0\t1.000000"]);
  });

  it("flushes buffered responses on EOF", async () => {
    const shuffled: SidecarConfig = { ...OVERLAP, shuffleWindow: 8 };
    const { out } = await drive(shuffled, [HELLO, "0\ta\ta", "1\ta\ta"]);
    expect(out).toHaveLength(3);
  });
});
