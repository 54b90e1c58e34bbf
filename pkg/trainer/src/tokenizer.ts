/**
 * Hashing word tokenizer for the tiny-random model family.
 *
 * Words are lowercased alphanumeric runs hashed (FNV-1a) into a fixed
 * vocabulary; id 0 is reserved for padding. Sequences are truncated and
 * padded to maxTokens, which is capped at 512.
 */

export const PAD_ID = 0;

export interface Encoded {
  ids: Int32Array;
  length: number; // number of non-pad tokens
}

function fnv1a(word: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < word.length; i++) {
    hash ^= word.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

export class HashingTokenizer {
  readonly vocabSize: number;
  readonly maxTokens: number;

  constructor(vocabSize = 2048, maxTokens = 512) {
    if (maxTokens > 512) {
      throw new Error(`maxTokens must be <= 512, got ${maxTokens}`);
    }
    if (vocabSize < 2) {
      throw new Error(`vocabSize must be >= 2, got ${vocabSize}`);
    }
    this.vocabSize = vocabSize;
    this.maxTokens = maxTokens;
  }

  encode(text: string): Encoded {
    const words = text.toLowerCase().split(/[^a-z0-9]+/).filter((w) => w.length > 0);
    const kept = words.slice(0, this.maxTokens);
    const ids = new Int32Array(this.maxTokens).fill(PAD_ID);
    for (let i = 0; i < kept.length; i++) {
      ids[i] = 1 + (fnv1a(kept[i]) % (this.vocabSize - 1));
    }
    return { ids, length: kept.length };
  }
}
