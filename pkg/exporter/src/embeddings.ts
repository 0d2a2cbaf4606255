/**
 * Pluggable per-view image embedding extractors.
 *
 * The exporter records whichever extractor produced the vectors and its
 * actual output dimension; nothing downstream assumes a fixed width. The
 * default tag names a pretrained-CNN penultimate layer, which requires an
 * implementation to be registered by the integration that owns the model
 * weights. The built-in "hash-projection-v1" extractor is a deterministic
 * stand-in used by tests and offline smoke runs: it hashes the image bytes
 * into a seeded pseudo-random vector, so identical images map to identical
 * embeddings.
 */

export interface EmbeddingExtractor {
  readonly id: string;
  readonly dim: number;
  extract(imageBytes: Uint8Array, view: string): number[];
}

export const DEFAULT_EXTRACTOR_ID = "resnet152v2-penultimate";

const registry = new Map<string, EmbeddingExtractor>();

export function registerExtractor(extractor: EmbeddingExtractor): void {
  registry.set(extractor.id, extractor);
}

export function getExtractor(id: string): EmbeddingExtractor {
  const found = registry.get(id);
  if (!found) {
    const known = [...registry.keys()].sort().join(", ") || "(none)";
    throw new Error(
      `no embedding extractor registered under '${id}' (available: ${known}); ` +
      `register one or export without --views`,
    );
  }
  return found;
}

/** splitmix64; good avalanche behavior, cheap, and dependency-free. */
function splitmix64(state: bigint): [bigint, bigint] {
  let z = (state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
  let x = z;
  x = ((x ^ (x >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
  x = ((x ^ (x >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
  x = x ^ (x >> 31n);
  return [z, x];
}

export class HashProjectionExtractor implements EmbeddingExtractor {
  readonly id = "hash-projection-v1";

  constructor(readonly dim: number = 32) {}

  extract(imageBytes: Uint8Array, view: string): number[] {
    // FNV-1a over view name and image bytes seeds the generator
    let h = 0xcbf29ce484222325n;
    const prime = 0x100000001b3n;
    for (const ch of Buffer.from(view, "utf-8")) {
      h = ((h ^ BigInt(ch)) * prime) & 0xffffffffffffffffn;
    }
    for (const byte of imageBytes) {
      h = ((h ^ BigInt(byte)) * prime) & 0xffffffffffffffffn;
    }
    const out = new Array<number>(this.dim);
    let state = h;
    for (let i = 0; i < this.dim; i++) {
      let bits: bigint;
      [state, bits] = splitmix64(state);
      // map the top 53 bits to [-1, 1)
      out[i] = Number(bits >> 11n) / 2 ** 52 - 1.0;
    }
    return out;
  }
}

registerExtractor(new HashProjectionExtractor());
