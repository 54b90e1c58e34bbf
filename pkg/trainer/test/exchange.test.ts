/**
 * Exchange round-trip: predictions written by the trainer must be accepted
 * verbatim by the annotation pipeline's `evaluate` command, and the
 * resulting comparison table must render every column.
 */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { LABEL_ORDER } from "../src/data.js";
import { exportPredictions } from "../src/export.js";
import { TRAINER_DEFAULTS, trainCv } from "../src/train.js";
import { microF1, roundRobinFolds, separableDataset } from "./helpers.js";

const tmpRoot = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-exchange-"));
afterAll(() => fs.rmSync(tmpRoot, { recursive: true, force: true }));

function writeGold(examples: ReturnType<typeof separableDataset>, file: string) {
  const lines = examples.map((e) =>
    JSON.stringify({
      post_id: e.postId,
      text: e.text,
      labels: LABEL_ORDER.filter((_, i) => e.targets[i] === 1),
    }),
  );
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

function writeFoldsCsv(folds: Map<string, number>, file: string) {
  const rows = ["post_id,fold"];
  for (const postId of [...folds.keys()].sort()) rows.push(`${postId},${folds.get(postId)}`);
  fs.writeFileSync(file, rows.join("\n") + "\n");
}

describe("round trip into the evaluation pipeline", () => {
  const examples = separableDataset(300, 13);
  const folds = roundRobinFolds(examples, 5);
  const config = { ...TRAINER_DEFAULTS, learningRate: 0.01, seed: 17 };
  const results = trainCv(examples, folds, config);
  const outDir = path.join(tmpRoot, "preds");
  const files = exportPredictions(results, config, outDir);
  const goldPath = path.join(tmpRoot, "training.ndjson");
  writeGold(examples, goldPath);
  writeFoldsCsv(folds, path.join(tmpRoot, "folds.csv"));

  it("writes one prediction per example plus a train report", () => {
    const lines = fs.readFileSync(files.combined, "utf-8").trim().split("\n");
    expect(lines.length).toBe(300);
    const row = JSON.parse(lines[0]);
    expect(Object.keys(row).sort()).toEqual(["fold", "labels", "post_id", "scores"]);
    const report = JSON.parse(fs.readFileSync(files.trainReport, "utf-8"));
    expect(report.folds.length).toBe(5);
    expect(report.model_id).toBe("tiny-random");
  });

  it("primary evaluate accepts the files and renders all table columns", () => {
    const evalDir = path.join(tmpRoot, "evaluation");
    execFileSync(
      "python3",
      [
        "-m", "mindlens.cli", "evaluate",
        "--gold", goldPath,
        "--pred", files.combined,
        "--train-report", files.trainReport,
        "--annotator", "synthetic",
        "--model", "tiny-random",
        "--out", evalDir,
      ],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    const csv = fs.readFileSync(path.join(evalDir, "comparison.csv"), "utf-8");
    const [header, row] = csv.trim().split("\n");
    expect(header).toBe(
      "annotator,model,train_accuracy_pct,val_accuracy_pct,precision,recall,f1",
    );
    const cells = row.split(",");
    expect(cells[0]).toBe("synthetic");
    expect(cells[1]).toBe("tiny-random");
    for (const cell of cells.slice(2)) {
      expect(cell.length).toBeGreaterThan(0);
      expect(Number.isFinite(Number(cell))).toBe(true);
    }
    const json = JSON.parse(
      fs.readFileSync(path.join(evalDir, "comparison.json"), "utf-8"),
    );
    expect(json.rows[0].val_accuracy_pct).toBeGreaterThan(50);
    expect(json.rows[0].f1).toBeGreaterThanOrEqual(0.95);
  });

  it("validation micro-F1 computed locally agrees with the dataset being separable", () => {
    const goldById = new Map(examples.map((e) => [e.postId, e.targets]));
    expect(microF1(results.flatMap((r) => r.predictions), goldById)).toBeGreaterThanOrEqual(0.95);
  });
});
