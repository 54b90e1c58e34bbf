#!/usr/bin/env node
/**
 * Train multi-label text classifiers on an exported annotation set with
 * k-fold cross-validation and write fold predictions for evaluation.
 *
 * Usage:
 *   mindlens-trainer --data DIR --folds FILE --out DIR \
 *       [--model tiny-random] [--lr 3e-5] [--epochs 10] [--threshold 0.5] \
 *       [--seed 0] [--max-tokens 512] [--batch-size 16]
 *
 * --data expects the directory holding training.ndjson.
 */

import * as path from "node:path";
import { parseArgs } from "node:util";

import { readFoldsCsv, readTrainingExport } from "./data.js";
import { exportPredictions } from "./export.js";
import { TRAINER_DEFAULTS, TrainerConfig, trainCv } from "./train.js";

export function runCli(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      data: { type: "string" },
      folds: { type: "string" },
      out: { type: "string" },
      model: { type: "string", default: TRAINER_DEFAULTS.modelId },
      lr: { type: "string", default: String(TRAINER_DEFAULTS.learningRate) },
      epochs: { type: "string", default: String(TRAINER_DEFAULTS.epochs) },
      threshold: { type: "string", default: String(TRAINER_DEFAULTS.threshold) },
      seed: { type: "string", default: String(TRAINER_DEFAULTS.seed) },
      "max-tokens": { type: "string", default: String(TRAINER_DEFAULTS.maxTokens) },
      "batch-size": { type: "string", default: String(TRAINER_DEFAULTS.batchSize) },
    },
  });
  if (!values.data || !values.folds || !values.out) {
    console.error("error: --data, --folds, and --out are required");
    return 1;
  }
  const config: TrainerConfig = {
    ...TRAINER_DEFAULTS,
    modelId: values.model!,
    learningRate: Number(values.lr),
    epochs: parseInt(values.epochs!, 10),
    threshold: Number(values.threshold),
    seed: parseInt(values.seed!, 10),
    maxTokens: parseInt(values["max-tokens"]!, 10),
    batchSize: parseInt(values["batch-size"]!, 10),
  };
  const examples = readTrainingExport(path.join(values.data, "training.ndjson"));
  const folds = readFoldsCsv(values.folds);
  const results = trainCv(examples, folds, config);
  const files = exportPredictions(results, config, values.out);
  for (const result of results) {
    const finalLoss = result.lossTrace[result.lossTrace.length - 1];
    console.error(
      `fold ${result.fold}: train subset accuracy ` +
        `${result.trainSubsetAccuracy.toFixed(4)}, final loss ${finalLoss.toFixed(6)}, ` +
        `${result.predictions.length} held-out predictions`,
    );
  }
  console.error(`wrote ${files.combined} and ${files.trainReport}`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (invokedDirectly) {
  try {
    process.exit(runCli(process.argv.slice(2)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(2);
  }
}
