import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, describe, expect, it } from "vitest";

import { LABEL_ORDER } from "../src/data.js";
import { roundRobinFolds, separableDataset } from "./helpers.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const cliPath = path.join(here, "..", "dist", "cli.js");
const tmpRoot = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-cli-"));
afterAll(() => fs.rmSync(tmpRoot, { recursive: true, force: true }));

function prepareInputs(): { dataDir: string; foldsPath: string } {
  const examples = separableDataset(60, 29);
  const dataDir = path.join(tmpRoot, "data");
  fs.mkdirSync(dataDir, { recursive: true });
  fs.writeFileSync(
    path.join(dataDir, "training.ndjson"),
    examples
      .map((e) =>
        JSON.stringify({
          post_id: e.postId,
          text: e.text,
          labels: LABEL_ORDER.filter((_, i) => e.targets[i] === 1),
        }),
      )
      .join("\n") + "\n",
  );
  const folds = roundRobinFolds(examples, 3);
  const foldsPath = path.join(tmpRoot, "folds.csv");
  fs.writeFileSync(
    foldsPath,
    ["post_id,fold", ...[...folds.keys()].sort().map((id) => `${id},${folds.get(id)}`)].join("\n") + "\n",
  );
  return { dataDir, foldsPath };
}

describe("trainer CLI", () => {
  it("trains from files and writes predictions and report", () => {
    const { dataDir, foldsPath } = prepareInputs();
    const outDir = path.join(tmpRoot, "out");
    const stderr = execFileSync(
      "node",
      [
        cliPath, "--data", dataDir, "--folds", foldsPath, "--out", outDir,
        "--model", "tiny-random", "--lr", "0.01", "--epochs", "5", "--seed", "4",
      ],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    expect(fs.existsSync(path.join(outDir, "predictions.ndjson"))).toBe(true);
    expect(fs.existsSync(path.join(outDir, "predictions_fold0.ndjson"))).toBe(true);
    expect(fs.existsSync(path.join(outDir, "train_report.json"))).toBe(true);
    const report = JSON.parse(fs.readFileSync(path.join(outDir, "train_report.json"), "utf-8"));
    expect(report.config.learning_rate).toBe(0.01);
    expect(report.folds.length).toBe(3);
  });

  it("fails fast on a non-tiny model id", () => {
    const { dataDir, foldsPath } = prepareInputs();
    expect(() =>
      execFileSync(
        "node",
        [cliPath, "--data", dataDir, "--folds", foldsPath,
         "--out", path.join(tmpRoot, "out2"), "--model", "mental-roberta-base"],
        { stdio: ["ignore", "pipe", "pipe"] },
      ),
    ).toThrow();
  });

  it("requires the mandatory flags", () => {
    expect(() =>
      execFileSync("node", [cliPath, "--data", "x"], { stdio: ["ignore", "pipe", "pipe"] }),
    ).toThrow();
  });
});
