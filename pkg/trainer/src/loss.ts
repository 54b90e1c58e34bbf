/** Binary cross-entropy over independent sigmoid outputs, computed from
 * logits in the numerically stable form. */

export function sigmoid(z: number): number {
  return z >= 0 ? 1 / (1 + Math.exp(-z)) : Math.exp(z) / (1 + Math.exp(z));
}

/** Per-example BCE summed over labels, plus dL/dlogits for that example. */
export function bceWithLogits(
  logits: Float64Array,
  targets: Float64Array,
): { loss: number; dLogits: Float64Array } {
  const n = logits.length;
  const dLogits = new Float64Array(n);
  let loss = 0;
  for (let i = 0; i < n; i++) {
    const z = logits[i];
    const y = targets[i];
    loss += Math.max(z, 0) - z * y + Math.log1p(Math.exp(-Math.abs(z)));
    dLogits[i] = sigmoid(z) - y;
  }
  return { loss, dLogits };
}
