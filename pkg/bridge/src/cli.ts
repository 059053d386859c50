#!/usr/bin/env node
/**
 * aesthetics-bridge CLI.
 *
 * Usage: aesthetics-bridge serve [--model <weights.json>]
 *
 * Startup failures (bad arguments, unloadable weights, malformed STUB_SCORES)
 * exit nonzero before any protocol output. Once serving, every failure is
 * reported as a per-line error response and the exit status is 0.
 */
import { DEFAULT_WEIGHTS, loadWeights } from "./model";
import { makeModelScorer, makeStubScorer, serve, Scorer } from "./serve";

const USAGE = "usage: aesthetics-bridge serve [--model <weights.json>]";

class StartupError extends Error {}

interface CliArgs {
  modelPath: string | null;
}

function parseArgs(argv: string[]): CliArgs {
  if (argv[0] !== "serve") {
    throw new StartupError(USAGE);
  }
  let modelPath: string | null = null;
  let i = 1;
  while (i < argv.length) {
    const arg = argv[i];
    if (arg === "--model") {
      const value = argv[i + 1];
      if (value === undefined) {
        throw new StartupError("--model requires a path");
      }
      modelPath = value;
      i += 2;
    } else {
      throw new StartupError(`unknown argument ${arg}\n${USAGE}`);
    }
  }
  return { modelPath };
}

export function parseStubScores(raw: string): [number, number, number, number] {
  const parts = raw.split(",").map((part) => part.trim());
  if (parts.length !== 4) {
    throw new StartupError(`STUB_SCORES must be four comma-separated numbers, got ${JSON.stringify(raw)}`);
  }
  const values = parts.map((part) => Number(part));
  if (parts.some((part) => part === "") || values.some((value) => !Number.isFinite(value))) {
    throw new StartupError(`STUB_SCORES must be four comma-separated numbers, got ${JSON.stringify(raw)}`);
  }
  return values as [number, number, number, number];
}

function buildScorer(args: CliArgs, env: NodeJS.ProcessEnv): Scorer {
  const stub = env.STUB_SCORES;
  if (stub) {
    return makeStubScorer(parseStubScores(stub));
  }
  if (args.modelPath !== null) {
    return makeModelScorer(loadWeights(args.modelPath));
  }
  return makeModelScorer(DEFAULT_WEIGHTS);
}

async function main(): Promise<number> {
  let scorer: Scorer;
  try {
    scorer = buildScorer(parseArgs(process.argv.slice(2)), process.env);
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    process.stderr.write(`aesthetics-bridge: ${message}\n`);
    return 1;
  }
  await serve(process.stdin, process.stdout, scorer);
  return 0;
}

main().then(
  (code) => {
    process.exitCode = code;
  },
  (err) => {
    process.stderr.write(`aesthetics-bridge: ${err instanceof Error ? err.message : String(err)}\n`);
    process.exitCode = 1;
  },
);
