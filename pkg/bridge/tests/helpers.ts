import { spawn } from "node:child_process";
import * as path from "node:path";
import * as readline from "node:readline";

/** Built CLI entrypoint; tests run from the package root via `npm test`. */
export const CLI = path.resolve("dist", "cli.js");

export interface WavOptions {
  sampleRate?: number;
  channels?: number;
  frequency?: number;
  amplitude?: number;
}

/** 16-bit PCM RIFF buffer holding a sine tone. */
export function makeWav(seconds: number, options: WavOptions = {}): Buffer {
  const sampleRate = options.sampleRate ?? 44100;
  const channels = options.channels ?? 1;
  const frequency = options.frequency ?? 440;
  const amplitude = options.amplitude ?? 0.5;
  const frames = Math.round(seconds * sampleRate);
  const data = Buffer.alloc(frames * channels * 2);
  for (let i = 0; i < frames; i++) {
    const value = Math.round(32767 * amplitude * Math.sin((2 * Math.PI * frequency * i) / sampleRate));
    for (let c = 0; c < channels; c++) {
      data.writeInt16LE(value, (i * channels + c) * 2);
    }
  }
  return wrapRiff(data, sampleRate, channels);
}

export function wrapRiff(data: Buffer, sampleRate: number, channels: number): Buffer {
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(1, 20);
  header.writeUInt16LE(channels, 22);
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * channels * 2, 28);
  header.writeUInt16LE(channels * 2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(data.length, 40);
  return Buffer.concat([header, data]);
}

export interface BridgeResult {
  code: number | null;
  stdout: string[];
  stderr: string;
}

export interface RunOptions {
  env?: Record<string, string>;
  args?: string[];
}

/** Feed lines to a fresh bridge process, close stdin, collect everything. */
export function runBridge(lines: string[], options: RunOptions = {}): Promise<BridgeResult> {
  const env = { ...process.env, ...(options.env ?? {}) };
  if (!(options.env && "STUB_SCORES" in options.env)) {
    delete env.STUB_SCORES;
  }
  const child = spawn("node", [CLI, ...(options.args ?? ["serve"])], { env });
  const stdout: string[] = [];
  let stderr = "";
  readline.createInterface({ input: child.stdout }).on("line", (line) => stdout.push(line));
  child.stderr.on("data", (chunk) => {
    stderr += chunk.toString();
  });
  const done = new Promise<number | null>((resolve) => child.on("close", resolve));
  child.stdin.write(lines.map((line) => line + "\n").join(""));
  child.stdin.end();
  return done.then((code) => ({ code, stdout, stderr }));
}

/** Bridge with stdin held open so per-line flushing can be observed. */
export class InteractiveBridge {
  private child;
  private pending: ((line: string) => void)[] = [];
  private buffered: string[] = [];

  constructor(options: RunOptions = {}) {
    const env = { ...process.env, ...(options.env ?? {}) };
    if (!(options.env && "STUB_SCORES" in options.env)) {
      delete env.STUB_SCORES;
    }
    this.child = spawn("node", [CLI, ...(options.args ?? ["serve"])], { env });
    readline.createInterface({ input: this.child.stdout }).on("line", (line) => {
      const waiter = this.pending.shift();
      if (waiter) {
        waiter(line);
      } else {
        this.buffered.push(line);
      }
    });
  }

  send(line: string): void {
    this.child.stdin.write(line + "\n");
  }

  next(timeoutMs = 5000): Promise<string> {
    const queued = this.buffered.shift();
    if (queued !== undefined) {
      return Promise.resolve(queued);
    }
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out waiting for response")), timeoutMs);
      this.pending.push((line) => {
        clearTimeout(timer);
        resolve(line);
      });
    });
  }

  close(): Promise<number | null> {
    const done = new Promise<number | null>((resolve) => this.child.on("close", resolve));
    this.child.stdin.end();
    return done;
  }
}
