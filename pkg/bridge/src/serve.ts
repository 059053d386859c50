/**
 * Line-oriented JSON protocol over stdio.
 *
 * Requests:  {"path": "<wav file>"}         one per line
 * Responses: {"path", "CE", "CU", "PC", "PQ"}  four scores in [1, 10]
 *       or:  {"path", "error"}                 never both
 *
 * Responses are emitted in request order, one per non-blank input line,
 * flushed as they are produced. Per-request failures (missing file, broken
 * audio) become error responses; the process itself keeps serving.
 */
import * as fs from "node:fs";
import * as readline from "node:readline";
import { once } from "node:events";
import { Readable, Writable } from "node:stream";
import { z } from "zod";
import { ModelWeights, Scores, scoreWav } from "./model";
import { readWav, WavError } from "./wav";

const requestSchema = z.object({ path: z.string() });

export type ScoreOutcome = { scores: Scores } | { error: string };
export type Scorer = (path: string) => ScoreOutcome;

export function makeStubScorer(quadruple: readonly [number, number, number, number]): Scorer {
  const [CE, CU, PC, PQ] = quadruple;
  return () => ({ scores: { CE, CU, PC, PQ } });
}

export function makeModelScorer(weights: ModelWeights): Scorer {
  return (path: string) => {
    let buffer: Buffer;
    try {
      buffer = fs.readFileSync(path);
    } catch (err) {
      const code = (err as NodeJS.ErrnoException).code;
      if (code === "ENOENT" || code === "ENOTDIR") {
        return { error: "file not found" };
      }
      return { error: `cannot read file: ${messageOf(err)}` };
    }
    try {
      return { scores: scoreWav(weights, readWav(buffer)) };
    } catch (err) {
      if (err instanceof WavError) {
        return { error: `cannot decode audio: ${err.message}` };
      }
      return { error: `internal error: ${messageOf(err)}` };
    }
  };
}

/** Response JSON for one input line, or null for blank lines. */
export function handleLine(line: string, scorer: Scorer): string | null {
  const trimmed = line.trim();
  if (trimmed === "") {
    return null;
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(trimmed);
  } catch {
    return JSON.stringify({ path: null, error: "bad request" });
  }
  const request = requestSchema.safeParse(parsed);
  if (!request.success) {
    return JSON.stringify({ path: null, error: "bad request" });
  }
  const path = request.data.path;
  let outcome: ScoreOutcome;
  try {
    outcome = scorer(path);
  } catch (err) {
    outcome = { error: `internal error: ${messageOf(err)}` };
  }
  if ("error" in outcome) {
    return JSON.stringify({ path, error: outcome.error });
  }
  const { CE, CU, PC, PQ } = outcome.scores;
  return JSON.stringify({ path, CE, CU, PC, PQ });
}

export async function serve(input: Readable, output: Writable, scorer: Scorer): Promise<void> {
  const lines = readline.createInterface({ input, crlfDelay: Infinity });
  for await (const line of lines) {
    const response = handleLine(line, scorer);
    if (response === null) {
      continue;
    }
    if (!output.write(response + "\n")) {
      await once(output, "drain");
    }
  }
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
