/** AdamW with decoupled weight decay (decay applied to weights, not biases). */

import { Gradients, TinyEncoder } from "./model.js";

export interface AdamWConfig {
  learningRate: number;
  beta1: number;
  beta2: number;
  epsilon: number;
  weightDecay: number;
}

export const ADAMW_DEFAULTS: Omit<AdamWConfig, "learningRate"> = {
  beta1: 0.9,
  beta2: 0.999,
  epsilon: 1e-8,
  weightDecay: 0.01,
};

interface Slot {
  m: Float64Array;
  v: Float64Array;
}

export class AdamW {
  private readonly config: AdamWConfig;
  private readonly slots: Map<string, Slot> = new Map();
  private step = 0;

  constructor(config: AdamWConfig) {
    this.config = config;
  }

  private slot(name: string, size: number): Slot {
    let slot = this.slots.get(name);
    if (!slot) {
      slot = { m: new Float64Array(size), v: new Float64Array(size) };
      this.slots.set(name, slot);
    }
    return slot;
  }

  update(model: TinyEncoder, grads: Gradients): void {
    this.step += 1;
    this.apply("emb", model.emb, grads.emb, true);
    this.apply("w1", model.w1, grads.w1, true);
    this.apply("b1", model.b1, grads.b1, false);
    this.apply("w2", model.w2, grads.w2, true);
    this.apply("b2", model.b2, grads.b2, false);
  }

  private apply(name: string, params: Float64Array, grads: Float64Array, decay: boolean): void {
    const { learningRate, beta1, beta2, epsilon, weightDecay } = this.config;
    const { m, v } = this.slot(name, params.length);
    const mCorr = 1 - Math.pow(beta1, this.step);
    const vCorr = 1 - Math.pow(beta2, this.step);
    for (let i = 0; i < params.length; i++) {
      const g = grads[i];
      m[i] = beta1 * m[i] + (1 - beta1) * g;
      v[i] = beta2 * v[i] + (1 - beta2) * g * g;
      const mHat = m[i] / mCorr;
      const vHat = v[i] / vCorr;
      let delta = mHat / (Math.sqrt(vHat) + epsilon);
      if (decay) delta += weightDecay * params[i];
      params[i] -= learningRate * delta;
    }
  }
}
