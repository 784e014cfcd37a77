/**
 * HCAF v1 tensor files: magic "HCAF", then little-endian u32 version=1,
 * height, width, channels, then height*width*channels little-endian
 * float32 values, pixel-major.
 */

const MAGIC = 'HCAF';
const VERSION = 1;
const HEADER_BYTES = 20;

export interface HcafTensor {
  height: number;
  width: number;
  channels: number;
  /** Row-major (y, x, c) float32 values, length height*width*channels. */
  data: Float32Array;
}

export function encodeHcaf(tensor: HcafTensor): Buffer {
  const { height, width, channels, data } = tensor;
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw new Error('tensor dimensions must be positive');
  }
  if (data.length !== height * width * channels) {
    throw new Error(
      `payload length ${data.length} != ${height}*${width}*${channels}`,
    );
  }
  const buf = Buffer.alloc(HEADER_BYTES + data.length * 4);
  buf.write(MAGIC, 0, 'ascii');
  buf.writeUInt32LE(VERSION, 4);
  buf.writeUInt32LE(height, 8);
  buf.writeUInt32LE(width, 12);
  buf.writeUInt32LE(channels, 16);
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], HEADER_BYTES + i * 4);
  }
  return buf;
}

export function decodeHcaf(buf: Buffer): HcafTensor {
  if (buf.length < HEADER_BYTES || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('not an HCAF file');
  }
  const version = buf.readUInt32LE(4);
  if (version !== VERSION) {
    throw new Error(`unsupported HCAF version ${version}`);
  }
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const channels = buf.readUInt32LE(16);
  const count = height * width * channels;
  if (buf.length !== HEADER_BYTES + count * 4) {
    throw new Error(
      `payload length ${buf.length - HEADER_BYTES} != expected ${count * 4}`,
    );
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  }
  return { height, width, channels, data };
}
