/**
 * Deterministic aesthetics predictor.
 *
 * Four dimensions are scored from summary features of the decoded audio:
 * CE (content enjoyment), CU (content usefulness), PC (production
 * complexity), PQ (production quality). Each score is 1 + 9 * sigmoid(w.f + b)
 * for a per-dimension weight vector, so every score lies in (1, 10) by
 * construction. Weights ship as a built-in default and may be overridden by a
 * JSON file so the predictor can be retrained without code changes.
 */
import * as fs from "node:fs";
import { z } from "zod";
import { WavData } from "./wav";

export class ModelError extends Error {}

export const DIMENSIONS = ["CE", "CU", "PC", "PQ"] as const;
export type Dimension = (typeof DIMENSIONS)[number];
export type Scores = Record<Dimension, number>;

const FEATURE_COUNT = 6;

const dimensionSchema = z.object({
  w: z.array(z.number()).length(FEATURE_COUNT),
  b: z.number(),
});

const weightsSchema = z.object({
  version: z.string(),
  dimensions: z.object({
    CE: dimensionSchema,
    CU: dimensionSchema,
    PC: dimensionSchema,
    PQ: dimensionSchema,
  }),
});

export type ModelWeights = z.infer<typeof weightsSchema>;

export const DEFAULT_WEIGHTS: ModelWeights = {
  version: "heuristic-v1",
  dimensions: {
    CE: { w: [2.4, 0.6, -3.0, 1.1, 0.8, -2.2], b: 0.25 },
    CU: { w: [1.6, 0.4, -1.8, 0.9, 1.4, -1.6], b: 0.35 },
    PC: { w: [0.9, 0.3, 4.5, 2.2, 1.0, -1.2], b: -1.1 },
    PQ: { w: [2.8, 1.2, -2.4, 0.7, 0.5, -3.0], b: 0.55 },
  },
};

export function loadWeights(path: string): ModelWeights {
  let raw: string;
  try {
    raw = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new ModelError(`cannot read model weights at ${path}: ${message(err)}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch (err) {
    throw new ModelError(`model weights at ${path} are not valid JSON: ${message(err)}`);
  }
  const result = weightsSchema.safeParse(parsed);
  if (!result.success) {
    throw new ModelError(`model weights at ${path} have the wrong shape`);
  }
  return result.data;
}

/**
 * Features, each roughly in [0, 1]:
 *   0 rms        channel-averaged signal power
 *   1 peak       maximum absolute amplitude
 *   2 zcr        zero crossings per sample (spectral brightness proxy)
 *   3 dynamics   spread between the loud and median amplitude
 *   4 duration   clip length, saturating at 30 seconds
 *   5 silence    fraction of near-silent samples
 */
export function extractFeatures(data: WavData): number[] {
  const n = data.samples.length;
  if (n === 0) {
    return [0, 0, 0, 0, 0, 1];
  }
  let sumSquares = 0;
  let peak = 0;
  let crossings = 0;
  let silent = 0;
  const magnitudes = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    const x = data.samples[i]!;
    const mag = Math.abs(x);
    magnitudes[i] = mag;
    sumSquares += x * x;
    if (mag > peak) {
      peak = mag;
    }
    if (mag < 1e-3) {
      silent += 1;
    }
    if (i > 0 && x * data.samples[i - 1]! < 0) {
      crossings += 1;
    }
  }
  magnitudes.sort();
  const median = magnitudes[Math.floor(n / 2)]!;
  const p95 = magnitudes[Math.min(n - 1, Math.floor(n * 0.95))]!;
  const rms = Math.sqrt(sumSquares / n);
  const zcr = crossings / n;
  const dynamics = Math.log1p(p95 - median);
  const duration = Math.min(n / data.sampleRate / 30, 1);
  const silence = silent / n;
  return [rms, peak, zcr, dynamics, duration, silence];
}

function sigmoid(x: number): number {
  return 1 / (1 + Math.exp(-x));
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, x));
}

export function scoreFeatures(weights: ModelWeights, features: number[]): Scores {
  if (features.length !== FEATURE_COUNT) {
    throw new ModelError(`expected ${FEATURE_COUNT} features, got ${features.length}`);
  }
  const scores = {} as Scores;
  for (const dim of DIMENSIONS) {
    const { w, b } = weights.dimensions[dim];
    let acc = b;
    for (let i = 0; i < FEATURE_COUNT; i++) {
      acc += w[i]! * features[i]!;
    }
    const value = 1 + 9 * sigmoid(acc);
    scores[dim] = Math.round(clamp(value, 1, 10) * 100) / 100;
  }
  return scores;
}

export function scoreWav(weights: ModelWeights, data: WavData): Scores {
  return scoreFeatures(weights, extractFeatures(data));
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
