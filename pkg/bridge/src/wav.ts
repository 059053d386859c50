/** Minimal RIFF/WAVE reader for 16-bit PCM, any channel count. */

export class WavError extends Error {}

export interface WavData {
  sampleRate: number;
  channels: number;
  /** Channel-averaged samples normalized to [-1, 1]. */
  samples: Float64Array;
}

interface FmtChunk {
  format: number;
  channels: number;
  sampleRate: number;
  bitsPerSample: number;
}

export function readWav(buffer: Buffer): WavData {
  if (buffer.length < 12) {
    throw new WavError("file too short for a RIFF header");
  }
  if (
    buffer.toString("ascii", 0, 4) !== "RIFF" ||
    buffer.toString("ascii", 8, 12) !== "WAVE"
  ) {
    throw new WavError("not a RIFF/WAVE file");
  }
  let fmt: FmtChunk | null = null;
  let data: Buffer | null = null;
  let offset = 12;
  while (offset + 8 <= buffer.length) {
    const id = buffer.toString("ascii", offset, offset + 4);
    const size = buffer.readUInt32LE(offset + 4);
    const body = offset + 8;
    if (body + size > buffer.length) {
      throw new WavError(`truncated ${id.trim() || "chunk"} chunk`);
    }
    if (id === "fmt ") {
      if (size < 16) {
        throw new WavError("fmt chunk too short");
      }
      fmt = {
        format: buffer.readUInt16LE(body),
        channels: buffer.readUInt16LE(body + 2),
        sampleRate: buffer.readUInt32LE(body + 4),
        bitsPerSample: buffer.readUInt16LE(body + 14),
      };
    } else if (id === "data") {
      data = buffer.subarray(body, body + size);
    }
    // Chunks are word-aligned; odd sizes carry one pad byte.
    offset = body + size + (size % 2);
  }
  if (fmt === null) {
    throw new WavError("missing fmt chunk");
  }
  if (data === null) {
    throw new WavError("missing data chunk");
  }
  if (fmt.format !== 1) {
    throw new WavError(`unsupported format tag ${fmt.format}; only PCM is supported`);
  }
  if (fmt.bitsPerSample !== 16) {
    throw new WavError(`unsupported bit depth ${fmt.bitsPerSample}; only 16-bit is supported`);
  }
  if (fmt.channels < 1) {
    throw new WavError("channel count must be positive");
  }
  if (fmt.sampleRate < 1) {
    throw new WavError("sample rate must be positive");
  }
  const frameBytes = 2 * fmt.channels;
  const frames = Math.floor(data.length / frameBytes);
  const samples = new Float64Array(frames);
  for (let i = 0; i < frames; i++) {
    let acc = 0;
    for (let c = 0; c < fmt.channels; c++) {
      acc += data.readInt16LE(i * frameBytes + c * 2);
    }
    samples[i] = acc / fmt.channels / 32768;
  }
  return { sampleRate: fmt.sampleRate, channels: fmt.channels, samples };
}
