import { describe, expect, it } from 'vitest';
import { decodeHcaf, encodeHcaf } from '../src/hcaf';

describe('hcaf codec', () => {
  it('round trips every float bit-exactly', () => {
    const data = new Float32Array(4 * 3 * 2);
    for (let i = 0; i < data.length; i++) {
      data[i] = Math.sin(i * 12.9898) * 43758.5453;
    }
    data[0] = 0;
    data[1] = -0;
    data[2] = 1.1754944e-38; // smallest normal f32
    const tensor = { height: 4, width: 3, channels: 2, data };
    const buf = encodeHcaf(tensor);
    const back = decodeHcaf(buf);
    expect(back.height).toBe(4);
    expect(back.width).toBe(3);
    expect(back.channels).toBe(2);
    expect(Buffer.from(back.data.buffer)).toEqual(Buffer.from(data.buffer));
    expect(encodeHcaf(back)).toEqual(buf);
  });

  it('writes the documented header layout', () => {
    const buf = encodeHcaf({
      height: 2,
      width: 5,
      channels: 3,
      data: new Float32Array(30),
    });
    expect(buf.toString('ascii', 0, 4)).toBe('HCAF');
    expect(buf.readUInt32LE(4)).toBe(1);
    expect(buf.readUInt32LE(8)).toBe(2);
    expect(buf.readUInt32LE(12)).toBe(5);
    expect(buf.readUInt32LE(16)).toBe(3);
    expect(buf.length).toBe(20 + 30 * 4);
  });

  it('rejects bad magic and truncated payloads', () => {
    const good = encodeHcaf({
      height: 2,
      width: 2,
      channels: 1,
      data: new Float32Array(4),
    });
    const badMagic = Buffer.from(good);
    badMagic.write('NOPE', 0, 'ascii');
    expect(() => decodeHcaf(badMagic)).toThrow(/not an HCAF/);
    expect(() => decodeHcaf(good.subarray(0, good.length - 4))).toThrow(
      /payload length/,
    );
  });

  it('rejects mismatched dimensions on encode', () => {
    expect(() =>
      encodeHcaf({ height: 2, width: 2, channels: 2, data: new Float32Array(7) }),
    ).toThrow(/payload length/);
  });
});
