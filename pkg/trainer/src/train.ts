/**
 * K-fold cross-validation training: for each fold, fit on the remaining
 * folds and predict the held-out posts. Sigmoid scores are thresholded
 * into label sets; an empty set exports as ["None"]. Loss is the mean
 * binary cross-entropy per (example, label).
 */

import { AdamW, ADAMW_DEFAULTS } from "./adamw.js";
import { LABEL_ORDER, N_LABELS, TrainingExample } from "./data.js";
import { bceWithLogits, sigmoid } from "./loss.js";
import { Gradients, TinyEncoder, resolveModel } from "./model.js";
import { Rng } from "./rng.js";
import { Encoded, HashingTokenizer } from "./tokenizer.js";

export interface TrainerConfig {
  modelId: string;
  maxTokens: number;
  learningRate: number;
  epochs: number;
  threshold: number;
  seed: number;
  batchSize: number;
  vocabSize: number;
  weightDecay: number;
}

export const TRAINER_DEFAULTS: TrainerConfig = {
  modelId: "tiny-random",
  maxTokens: 512,
  learningRate: 3e-5,
  epochs: 10,
  threshold: 0.5,
  seed: 0,
  batchSize: 16,
  vocabSize: 2048,
  weightDecay: 0.01,
};

export function validateConfig(config: TrainerConfig): void {
  if (config.maxTokens > 512 || config.maxTokens < 1) {
    throw new Error(`maxTokens must be in [1, 512], got ${config.maxTokens}`);
  }
  if (config.epochs < 1) throw new Error(`epochs must be >= 1, got ${config.epochs}`);
  if (!(config.threshold > 0 && config.threshold < 1)) {
    throw new Error(`threshold must be in (0, 1), got ${config.threshold}`);
  }
  if (!(config.learningRate > 0)) {
    throw new Error(`learning rate must be positive, got ${config.learningRate}`);
  }
  resolveModel(config.modelId, config.vocabSize, N_LABELS);
}

export interface Prediction {
  postId: string;
  fold: number;
  scores: Float64Array;
  labels: string[]; // thresholded; ["None"] when empty
}

export interface FoldResult {
  fold: number;
  trainSubsetAccuracy: number;
  lossTrace: number[];
  predictions: Prediction[];
}

interface Prepared {
  postId: string;
  encoded: Encoded;
  targets: Float64Array;
}

function thresholdLabels(scores: Float64Array, threshold: number): string[] {
  const labels: string[] = [];
  for (let i = 0; i < N_LABELS; i++) {
    if (scores[i] >= threshold) labels.push(LABEL_ORDER[i]);
  }
  return labels.length > 0 ? labels : ["None"];
}

function scoresOf(model: TinyEncoder, encoded: Encoded): Float64Array {
  const { logits } = model.forward(encoded);
  const scores = new Float64Array(logits.length);
  for (let i = 0; i < logits.length; i++) scores[i] = sigmoid(logits[i]);
  return scores;
}

function subsetAccuracy(model: TinyEncoder, items: Prepared[], threshold: number): number {
  if (items.length === 0) return 0;
  let exact = 0;
  for (const item of items) {
    const scores = scoresOf(model, item.encoded);
    let match = true;
    for (let i = 0; i < N_LABELS; i++) {
      if ((scores[i] >= threshold ? 1 : 0) !== item.targets[i]) {
        match = false;
        break;
      }
    }
    if (match) exact += 1;
  }
  return exact / items.length;
}

/** One seeded training pass over a fixed example set; returns the loss trace. */
export function fitModel(
  model: TinyEncoder,
  items: Prepared[],
  config: TrainerConfig,
  rng: Rng,
  context: string,
): number[] {
  const optimizer = new AdamW({
    learningRate: config.learningRate,
    ...ADAMW_DEFAULTS,
    weightDecay: config.weightDecay,
  });
  const grads = new Gradients(model.shape);
  const trace: number[] = [];
  const order = items.map((_, i) => i);
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    rng.shuffle(order);
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += config.batchSize) {
      const batch = order.slice(start, start + config.batchSize);
      grads.reset();
      let batchLoss = 0;
      for (const index of batch) {
        const item = items[index];
        const cache = model.forward(item.encoded);
        const { loss, dLogits } = bceWithLogits(cache.logits, item.targets);
        batchLoss += loss;
        for (let i = 0; i < dLogits.length; i++) {
          dLogits[i] /= batch.length * N_LABELS;
        }
        model.backward(item.encoded, cache, dLogits, grads);
      }
      optimizer.update(model, grads);
      epochLoss += batchLoss;
    }
    const meanLoss = epochLoss / (items.length * N_LABELS);
    if (!Number.isFinite(meanLoss)) {
      throw new Error(`non-finite loss in ${context} at epoch ${epoch}`);
    }
    trace.push(meanLoss);
  }
  return trace;
}

export function trainCv(
  examples: TrainingExample[],
  folds: Map<string, number>,
  config: TrainerConfig,
): FoldResult[] {
  validateConfig(config);
  const exampleIds = new Set(examples.map((e) => e.postId));
  for (const postId of folds.keys()) {
    if (!exampleIds.has(postId)) {
      throw new Error(`folds file references post '${postId}' missing from training set`);
    }
  }
  for (const example of examples) {
    if (!folds.has(example.postId)) {
      throw new Error(`training set post '${example.postId}' missing from folds file`);
    }
  }

  const tokenizer = new HashingTokenizer(config.vocabSize, config.maxTokens);
  const prepared: Prepared[] = examples.map((e) => ({
    postId: e.postId,
    encoded: tokenizer.encode(e.text),
    targets: e.targets,
  }));
  const k = Math.max(...folds.values()) + 1;
  const shape = resolveModel(config.modelId, config.vocabSize, N_LABELS);

  const results: FoldResult[] = [];
  for (let fold = 0; fold < k; fold++) {
    const train = prepared.filter((p) => folds.get(p.postId) !== fold);
    const heldOut = prepared.filter((p) => folds.get(p.postId) === fold);
    const model = new TinyEncoder(shape, config.seed + fold * 9973);
    const rng = new Rng(config.seed + fold * 7919 + 1);
    const trace = fitModel(model, train, config, rng, `fold ${fold}`);
    const predictions = heldOut
      .map((item) => {
        const scores = scoresOf(model, item.encoded);
        return {
          postId: item.postId,
          fold,
          scores,
          labels: thresholdLabels(scores, config.threshold),
        };
      })
      .sort((a, b) => (a.postId < b.postId ? -1 : a.postId > b.postId ? 1 : 0));
    results.push({
      fold,
      trainSubsetAccuracy: subsetAccuracy(model, train, config.threshold),
      lossTrace: trace,
      predictions,
    });
  }
  return results;
}
