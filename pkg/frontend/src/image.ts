import { readFileSync } from 'fs';
import { PNG } from 'pngjs';

export interface RgbImage {
  height: number;
  width: number;
  /** Row-major (y, x, c) values in [0, 1], 3 channels. */
  data: Float32Array;
}

export function loadPng(path: string): RgbImage {
  const png = PNG.sync.read(readFileSync(path));
  const { width, height } = png;
  const data = new Float32Array(height * width * 3);
  for (let i = 0; i < height * width; i++) {
    data[i * 3] = png.data[i * 4] / 255;
    data[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    data[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { height, width, data };
}

/** Index mapping shared with the consumer side: floor((i + 0.5) * src / dst). */
export function nearestIndices(dst: number, src: number): Int32Array {
  const idx = new Int32Array(dst);
  for (let i = 0; i < dst; i++) {
    idx[i] = Math.min(src - 1, Math.floor(((i + 0.5) * src) / dst));
  }
  return idx;
}

/** Nearest-neighbor resize of a row-major (h, w, c) field. */
export function resizeNearest(
  data: Float32Array,
  height: number,
  width: number,
  channels: number,
  newHeight: number,
  newWidth: number,
): Float32Array {
  const rows = nearestIndices(newHeight, height);
  const cols = nearestIndices(newWidth, width);
  const out = new Float32Array(newHeight * newWidth * channels);
  for (let y = 0; y < newHeight; y++) {
    for (let x = 0; x < newWidth; x++) {
      const src = (rows[y] * width + cols[x]) * channels;
      const dst = (y * newWidth + x) * channels;
      for (let c = 0; c < channels; c++) {
        out[dst + c] = data[src + c];
      }
    }
  }
  return out;
}
