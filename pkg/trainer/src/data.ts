/**
 * File exchange with the annotation pipeline: training exports are NDJSON
 * rows {post_id, text, labels}, folds come as a post_id,fold CSV, and
 * predictions leave as NDJSON rows {post_id, fold, labels, scores}.
 */

import * as fs from "node:fs";

export const LABEL_ORDER = [
  "ADHD",
  "Autism",
  "Anxiety",
  "Bipolar",
  "Depression",
  "EatingDisorder",
  "OCD",
  "PTSD",
  "Schizophrenia",
] as const;

export const N_LABELS = LABEL_ORDER.length;

const LABEL_INDEX = new Map<string, number>(LABEL_ORDER.map((l, i) => [l, i]));

export interface TrainingExample {
  postId: string;
  text: string;
  targets: Float64Array; // length 9, {0,1}
}

export function labelVector(labels: string[]): Float64Array {
  const targets = new Float64Array(N_LABELS);
  for (const label of labels) {
    const index = LABEL_INDEX.get(label);
    if (index === undefined) {
      throw new Error(`unknown label '${label}' in training data`);
    }
    targets[index] = 1;
  }
  return targets;
}

export function readTrainingExport(path: string): TrainingExample[] {
  const examples: TrainingExample[] = [];
  const seen = new Set<string>();
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    let row: { post_id?: unknown; text?: unknown; labels?: unknown };
    try {
      row = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON: ${err}`);
    }
    const postId = String(row.post_id ?? "");
    if (!postId) throw new Error(`${path}:${i + 1}: missing post_id`);
    if (seen.has(postId)) throw new Error(`${path}:${i + 1}: duplicate post_id '${postId}'`);
    seen.add(postId);
    const labels = row.labels;
    if (!Array.isArray(labels) || labels.length === 0) {
      throw new Error(`${path}:${i + 1}: labels must be a non-empty array`);
    }
    examples.push({
      postId,
      text: String(row.text ?? ""),
      targets: labelVector(labels.map(String)),
    });
  });
  if (examples.length === 0) throw new Error(`${path}: no training examples`);
  return examples;
}

export function readFoldsCsv(path: string): Map<string, number> {
  const lines = fs.readFileSync(path, "utf-8").split("\n").filter((l) => l.trim());
  if (lines[0] !== "post_id,fold") {
    throw new Error(`${path}: expected header 'post_id,fold'`);
  }
  const folds = new Map<string, number>();
  for (let i = 1; i < lines.length; i++) {
    const [postId, fold] = lines[i].split(",");
    if (postId === undefined || fold === undefined || !/^\d+$/.test(fold.trim())) {
      throw new Error(`${path}:${i + 1}: bad row '${lines[i]}'`);
    }
    if (folds.has(postId)) throw new Error(`${path}:${i + 1}: duplicate post_id '${postId}'`);
    folds.set(postId, parseInt(fold, 10));
  }
  if (folds.size === 0) throw new Error(`${path}: no fold rows`);
  return folds;
}
