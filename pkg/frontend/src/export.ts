import { writeFileSync } from 'fs';
import { basename, extname, join } from 'path';
import { encodeHcaf } from './hcaf';
import { loadPng } from './image';
import { extractFeatures } from './network';

export interface ExportSpec {
  imagePath: string;
  layers: string[];
  outDir: string;
}

/**
 * Export the requested activation layers of one image as HCAF files,
 * named `<image stem>.<layer>.hcaf`.  Returns the written paths.
 */
export function exportFeatures(spec: ExportSpec): string[] {
  if (spec.layers.length === 0) {
    throw new Error('at least one layer is required');
  }
  const image = loadPng(spec.imagePath);
  const features = extractFeatures(image, spec.layers);
  const stem = basename(spec.imagePath, extname(spec.imagePath));
  const written: string[] = [];
  for (const layer of spec.layers) {
    const { data, channels } = features.get(layer)!;
    const out = join(spec.outDir, `${stem}.${layer}.hcaf`);
    writeFileSync(
      out,
      encodeHcaf({
        height: image.height,
        width: image.width,
        channels,
        data,
      }),
    );
    written.push(out);
  }
  return written;
}
