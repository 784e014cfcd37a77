/**
 * A small fully-convolutional backbone with five conv/pool stages.
 *
 * Weights are generated from a fixed-seed PRNG instead of a downloaded
 * checkpoint, so the tool is self-contained and bit-deterministic.  The
 * consumer treats feature values as opaque, so any fixed backbone
 * satisfies the tensor contract.
 */

import * as tf from '@tensorflow/tfjs';
import { RgbImage, resizeNearest } from './image';

export const INPUT_SIZE = 500;
export const PADDING = 100;
const WEIGHT_SEED = 0x48434146; // "HCAF"

/** Output channels per stage; pool1..pool5 expose these widths. */
export const STAGE_CHANNELS = [4, 8, 8, 16, 16];

export const LAYER_NAMES = STAGE_CHANNELS.map((_, i) => `pool${i + 1}`);

/** mulberry32: tiny deterministic PRNG, uniform in [0, 1). */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

interface StageWeights {
  kernel: tf.Tensor4D; // [3, 3, inC, outC]
  bias: tf.Tensor1D;
}

function buildWeights(): StageWeights[] {
  const rand = mulberry32(WEIGHT_SEED);
  const stages: StageWeights[] = [];
  let inC = 3;
  for (const outC of STAGE_CHANNELS) {
    // He-style scale keeps activations in a sane range through the stack
    const scale = Math.sqrt(2 / (9 * inC));
    const kernel = new Float32Array(3 * 3 * inC * outC);
    for (let i = 0; i < kernel.length; i++) {
      kernel[i] = (rand() * 2 - 1) * scale;
    }
    const bias = new Float32Array(outC);
    for (let i = 0; i < outC; i++) {
      bias[i] = 0.01;
    }
    stages.push({
      kernel: tf.tensor4d(kernel, [3, 3, inC, outC]),
      bias: tf.tensor1d(bias),
    });
    inC = outC;
  }
  return stages;
}

let cachedWeights: StageWeights[] | null = null;

function weights(): StageWeights[] {
  if (!cachedWeights) {
    cachedWeights = buildWeights();
  }
  return cachedWeights;
}

/**
 * Run the backbone on an image and capture the requested pooling stages.
 *
 * The image is nearest-resized to 500x500, zero-padded by 100 pixels on
 * every side, and pushed through conv3x3/relu/maxpool2 stages.  Each
 * captured activation is cropped back to the un-padded region and
 * nearest-resized to the original image dimensions.
 */
export function extractFeatures(
  image: RgbImage,
  layers: string[],
): Map<string, { data: Float32Array; channels: number }> {
  for (const name of layers) {
    if (!LAYER_NAMES.includes(name)) {
      throw new Error(
        `unknown layer ${name}; available: ${LAYER_NAMES.join(', ')}`,
      );
    }
  }
  const lastStage = Math.max(
    ...layers.map((name) => LAYER_NAMES.indexOf(name)),
  );
  const resized = resizeNearest(
    image.data,
    image.height,
    image.width,
    3,
    INPUT_SIZE,
    INPUT_SIZE,
  );

  const captured = new Map<string, { data: Float32Array; channels: number }>();
  const stageWeights = weights(); // built outside tidy so the cache survives
  tf.tidy(() => {
    let x = tf
      .tensor4d(resized, [1, INPUT_SIZE, INPUT_SIZE, 3])
      .pad([
        [0, 0],
        [PADDING, PADDING],
        [PADDING, PADDING],
        [0, 0],
      ]) as tf.Tensor4D;
    for (let stage = 0; stage <= lastStage; stage++) {
      const { kernel, bias } = stageWeights[stage];
      x = tf.relu(tf.add(tf.conv2d(x, kernel, 1, 'same'), bias)) as tf.Tensor4D;
      x = tf.maxPool(x, 2, 2, 'same');
      const name = LAYER_NAMES[stage];
      if (layers.includes(name)) {
        captured.set(name, cropAndResize(x, stage + 1, image));
      }
    }
  });
  return captured;
}

/** Crop the padding margin in feature space, then resize to image dims. */
function cropAndResize(
  activation: tf.Tensor4D,
  poolCount: number,
  image: RgbImage,
): { data: Float32Array; channels: number } {
  const [, h, w, channels] = activation.shape;
  const scale = 2 ** poolCount;
  const r0 = Math.floor(PADDING / scale);
  const r1 = Math.min(h, Math.ceil((PADDING + INPUT_SIZE) / scale));
  const c0 = Math.floor(PADDING / scale);
  const c1 = Math.min(w, Math.ceil((PADDING + INPUT_SIZE) / scale));
  const cropped = activation.slice(
    [0, r0, c0, 0],
    [1, r1 - r0, c1 - c0, channels],
  );
  const data = resizeNearest(
    cropped.dataSync() as Float32Array,
    r1 - r0,
    c1 - c0,
    channels,
    image.height,
    image.width,
  );
  return { data, channels };
}
