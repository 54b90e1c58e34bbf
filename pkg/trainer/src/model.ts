/**
 * tiny-random: a seeded random-initialized miniature text encoder.
 *
 * Architecture: hashed embedding -> mean pool over non-pad tokens ->
 * tanh hidden layer -> linear head with one logit per label (sigmoid
 * activations live in the loss). Everything is Float64 and hand-rolled so
 * training is bit-reproducible given a seed and gradients are exactly
 * checkable against finite differences.
 */

import { Rng } from "./rng.js";
import { Encoded, PAD_ID } from "./tokenizer.js";

export interface ModelShape {
  vocabSize: number;
  embedDim: number;
  hiddenDim: number;
  nLabels: number;
}

export interface ForwardCache {
  pooled: Float64Array;
  hidden: Float64Array;
  logits: Float64Array;
}

export class Gradients {
  emb: Float64Array;
  w1: Float64Array;
  b1: Float64Array;
  w2: Float64Array;
  b2: Float64Array;

  constructor(shape: ModelShape) {
    this.emb = new Float64Array(shape.vocabSize * shape.embedDim);
    this.w1 = new Float64Array(shape.hiddenDim * shape.embedDim);
    this.b1 = new Float64Array(shape.hiddenDim);
    this.w2 = new Float64Array(shape.nLabels * shape.hiddenDim);
    this.b2 = new Float64Array(shape.nLabels);
  }

  reset(): void {
    this.emb.fill(0);
    this.w1.fill(0);
    this.b1.fill(0);
    this.w2.fill(0);
    this.b2.fill(0);
  }
}

export class TinyEncoder {
  readonly shape: ModelShape;
  emb: Float64Array;
  w1: Float64Array;
  b1: Float64Array;
  w2: Float64Array;
  b2: Float64Array;

  constructor(shape: ModelShape, seed: number) {
    this.shape = shape;
    const rng = new Rng(seed);
    const embScale = 1 / Math.sqrt(shape.embedDim);
    this.emb = TinyEncoder.gaussian(rng, shape.vocabSize * shape.embedDim, embScale);
    this.emb.fill(0, 0, shape.embedDim); // padding row stays zero
    this.w1 = TinyEncoder.gaussian(rng, shape.hiddenDim * shape.embedDim, embScale);
    this.b1 = new Float64Array(shape.hiddenDim);
    this.w2 = TinyEncoder.gaussian(rng, shape.nLabels * shape.hiddenDim, 1 / Math.sqrt(shape.hiddenDim));
    this.b2 = new Float64Array(shape.nLabels);
  }

  private static gaussian(rng: Rng, n: number, scale: number): Float64Array {
    const out = new Float64Array(n);
    for (let i = 0; i < n; i++) out[i] = rng.gauss() * scale;
    return out;
  }

  forward(input: Encoded): ForwardCache {
    const { embedDim, hiddenDim, nLabels } = this.shape;
    const pooled = new Float64Array(embedDim);
    const denom = Math.max(1, input.length);
    for (let t = 0; t < input.length; t++) {
      const id = input.ids[t];
      if (id === PAD_ID) continue;
      const base = id * embedDim;
      for (let d = 0; d < embedDim; d++) pooled[d] += this.emb[base + d];
    }
    for (let d = 0; d < embedDim; d++) pooled[d] /= denom;

    const hidden = new Float64Array(hiddenDim);
    for (let h = 0; h < hiddenDim; h++) {
      let z = this.b1[h];
      const row = h * embedDim;
      for (let d = 0; d < embedDim; d++) z += this.w1[row + d] * pooled[d];
      hidden[h] = Math.tanh(z);
    }

    const logits = new Float64Array(nLabels);
    for (let l = 0; l < nLabels; l++) {
      let z = this.b2[l];
      const row = l * hiddenDim;
      for (let h = 0; h < hiddenDim; h++) z += this.w2[row + h] * hidden[h];
      logits[l] = z;
    }
    return { pooled, hidden, logits };
  }

  /** Accumulate gradients for one example given dL/dlogits. */
  backward(input: Encoded, cache: ForwardCache, dLogits: Float64Array, grads: Gradients): void {
    const { embedDim, hiddenDim, nLabels } = this.shape;
    const dHidden = new Float64Array(hiddenDim);
    for (let l = 0; l < nLabels; l++) {
      const g = dLogits[l];
      if (g === 0) continue;
      const row = l * hiddenDim;
      grads.b2[l] += g;
      for (let h = 0; h < hiddenDim; h++) {
        grads.w2[row + h] += g * cache.hidden[h];
        dHidden[h] += g * this.w2[row + h];
      }
    }
    const dPooled = new Float64Array(embedDim);
    for (let h = 0; h < hiddenDim; h++) {
      const dz = dHidden[h] * (1 - cache.hidden[h] * cache.hidden[h]);
      if (dz === 0) continue;
      const row = h * embedDim;
      grads.b1[h] += dz;
      for (let d = 0; d < embedDim; d++) {
        grads.w1[row + d] += dz * cache.pooled[d];
        dPooled[d] += dz * this.w1[row + d];
      }
    }
    const denom = Math.max(1, input.length);
    for (let t = 0; t < input.length; t++) {
      const id = input.ids[t];
      if (id === PAD_ID) continue;
      const base = id * embedDim;
      for (let d = 0; d < embedDim; d++) grads.emb[base + d] += dPooled[d] / denom;
    }
  }
}

const TINY_RE = /^tiny-random(?:-(\d+)x(\d+))?$/;

/** Resolve a model id to a shape; only the tiny-random family is runnable. */
export function resolveModel(modelId: string, vocabSize: number, nLabels: number): ModelShape {
  const match = TINY_RE.exec(modelId);
  if (!match) {
    throw new Error(
      `model '${modelId}' is not available in this build; use 'tiny-random' ` +
        `or 'tiny-random-<embed>x<hidden>' (hosted pre-trained encoders require ` +
        `external weights)`,
    );
  }
  return {
    vocabSize,
    embedDim: match[1] ? parseInt(match[1], 10) : 32,
    hiddenDim: match[2] ? parseInt(match[2], 10) : 32,
    nLabels,
  };
}
