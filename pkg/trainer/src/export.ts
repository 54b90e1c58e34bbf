/**
 * Prediction export in the evaluation pipeline's exchange format:
 * one NDJSON file per fold plus a combined predictions.ndjson, and a
 * train_report.json sidecar with per-fold training accuracy and loss
 * traces. Fixed float formatting keeps outputs byte-stable.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { LABEL_ORDER } from "./data.js";
import { FoldResult, Prediction, TrainerConfig } from "./train.js";

function predictionLine(prediction: Prediction): string {
  const scores: Record<string, string> = {};
  LABEL_ORDER.forEach((label, i) => {
    scores[label] = prediction.scores[i].toFixed(6);
  });
  return JSON.stringify({
    post_id: prediction.postId,
    fold: prediction.fold,
    labels: prediction.labels,
    scores,
  });
}

export interface ExportedFiles {
  combined: string;
  perFold: string[];
  trainReport: string;
}

export function exportPredictions(
  results: FoldResult[],
  config: TrainerConfig,
  outDir: string,
): ExportedFiles {
  fs.mkdirSync(outDir, { recursive: true });
  const perFold: string[] = [];
  const combinedLines: string[] = [];
  for (const result of [...results].sort((a, b) => a.fold - b.fold)) {
    const lines = result.predictions.map(predictionLine);
    const foldPath = path.join(outDir, `predictions_fold${result.fold}.ndjson`);
    fs.writeFileSync(foldPath, lines.join("\n") + (lines.length ? "\n" : ""));
    perFold.push(foldPath);
    combinedLines.push(...lines);
  }
  const combined = path.join(outDir, "predictions.ndjson");
  fs.writeFileSync(combined, combinedLines.join("\n") + (combinedLines.length ? "\n" : ""));

  const trainReport = path.join(outDir, "train_report.json");
  const report = {
    model_id: config.modelId,
    config: {
      learning_rate: config.learningRate,
      epochs: config.epochs,
      max_tokens: config.maxTokens,
      threshold: config.threshold,
      batch_size: config.batchSize,
      vocab_size: config.vocabSize,
      weight_decay: config.weightDecay,
      seed: config.seed,
    },
    folds: results.map((r) => ({
      fold: r.fold,
      train_subset_accuracy: Number(r.trainSubsetAccuracy.toFixed(6)),
      loss_trace: r.lossTrace.map((v) => Number(v.toFixed(8))),
    })),
  };
  fs.writeFileSync(trainReport, JSON.stringify(report, null, 2) + "\n");
  return { combined, perFold, trainReport };
}
