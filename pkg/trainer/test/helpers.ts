/** Shared synthetic-data builders for the trainer tests.
 *
 * The separable dataset embeds one unique signal word per label, so a
 * correct model can reach near-perfect validation scores: the dataset is
 * the oracle for the convergence criteria.
 */

import { LABEL_ORDER, N_LABELS, TrainingExample, labelVector } from "../src/data.js";
import { Rng } from "../src/rng.js";

export const KEYWORDS = LABEL_ORDER.map((_, i) => `signalword${i}`);
const NOISE = Array.from({ length: 60 }, (_, i) => `noise${i}`);

export function separableDataset(n: number, seed: number): TrainingExample[] {
  const rng = new Rng(seed);
  const examples: TrainingExample[] = [];
  for (let i = 0; i < n; i++) {
    const chosen = new Set<number>();
    const nLabels = 1 + rng.int(3);
    while (chosen.size < nLabels) chosen.add(rng.int(N_LABELS));
    const words: string[] = [];
    for (const j of chosen) {
      words.push(KEYWORDS[j], KEYWORDS[j]);
    }
    for (let w = 0; w < 8; w++) words.push(NOISE[rng.int(NOISE.length)]);
    rng.shuffle(words);
    examples.push({
      postId: `s${String(i).padStart(4, "0")}`,
      text: words.join(" "),
      targets: labelVector([...chosen].map((j) => LABEL_ORDER[j])),
    });
  }
  return examples;
}

/** Replace 30% of example label sets with random wrong ones (training noise). */
export function flipLabels(examples: TrainingExample[], seed: number, rate = 0.3): TrainingExample[] {
  const rng = new Rng(seed);
  return examples.map((example) => {
    if (rng.next() >= rate) return example;
    const targets = new Float64Array(N_LABELS);
    targets[rng.int(N_LABELS)] = 1;
    return { ...example, targets };
  });
}

export function roundRobinFolds(examples: TrainingExample[], k: number): Map<string, number> {
  return new Map(examples.map((e, i) => [e.postId, i % k]));
}

export function microF1(
  predictions: { postId: string; labels: string[] }[],
  goldById: Map<string, Float64Array>,
): number {
  let tp = 0;
  let fp = 0;
  let fn = 0;
  for (const prediction of predictions) {
    const gold = goldById.get(prediction.postId)!;
    for (let i = 0; i < N_LABELS; i++) {
      const predicted = prediction.labels.includes(LABEL_ORDER[i]);
      const actual = gold[i] === 1;
      if (predicted && actual) tp += 1;
      else if (predicted) fp += 1;
      else if (actual) fn += 1;
    }
  }
  const precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  return precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
}
