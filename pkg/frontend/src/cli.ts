#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { exportFeatures } from './export';

yargs(hideBin(process.argv))
  .command(
    'export',
    'run the backbone on an image and write HCAF feature files',
    (y) =>
      y
        .option('image', { type: 'string', demandOption: true })
        .option('layers', {
          type: 'string',
          default: 'pool1,pool5',
          describe: 'comma-separated pooling stages to capture',
        })
        .option('out-dir', { type: 'string', demandOption: true }),
    (argv) => {
      try {
        const written = exportFeatures({
          imagePath: argv.image,
          layers: argv.layers.split(',').map((s) => s.trim()).filter(Boolean),
          outDir: argv.outDir,
        });
        for (const path of written) {
          console.log(path);
        }
      } catch (err) {
        console.error(`export failed: ${(err as Error).message}`);
        process.exit(1);
      }
    },
  )
  .demandCommand(1)
  .strict()
  .parse();
