/** CoNLL I/O, vocabulary, tag inventory and padded batching.
 *
 * Input files follow the cleaned-corpus contract of the scorer toolkit:
 * "token<space>tag" lines, blank line between sentences, UTF-8/LF.
 * Prediction files are "token<TAB>gold<TAB>pred" in the same sentence
 * layout.
 */

import { Rng } from "./rng.js";

export const PAD = 0;
export const UNK = 1;
export const PAD_TOKEN = "<pad>";
export const UNK_TOKEN = "<unk>";

export interface TaggedSentence {
  tokens: string[];
  tags: string[];
}

export function parseConll(text: string): TaggedSentence[] {
  const sentences: TaggedSentence[] = [];
  let tokens: string[] = [];
  let tags: string[] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (line === "") {
      if (tokens.length > 0) {
        sentences.push({ tokens, tags });
        tokens = [];
        tags = [];
      }
      continue;
    }
    const fields = line.split(/\s+/);
    if (fields.length < 2) throw new Error(`bad CoNLL line: ${rawLine}`);
    tokens.push(fields[0]);
    tags.push(fields[fields.length - 1]);
  }
  if (tokens.length > 0) sentences.push({ tokens, tags });
  return sentences;
}

export function writePredictionFile(sentences: TaggedSentence[], predTags: string[][]): string {
  const blocks = sentences.map((sentence, s) =>
    sentence.tokens.map((tok, t) => `${tok}\t${sentence.tags[t]}\t${predTags[s][t]}`).join("\n"),
  );
  return blocks.length === 0 ? "" : blocks.join("\n\n") + "\n";
}

/** Token -> id map with reserved PAD=0 and UNK=1.
 *
 * Tokens below minFreq are excluded and resolve to UNK at lookup time.
 * Ordering is frequency-descending, ties lexicographic, so the mapping is
 * deterministic for a given corpus.
 */
export class Vocab {
  readonly index: Map<string, number>;

  private constructor(index: Map<string, number>) {
    this.index = index;
  }

  static build(corpora: TaggedSentence[][], minFreq = 1): Vocab {
    const freq = new Map<string, number>();
    for (const corpus of corpora) {
      for (const sentence of corpus) {
        for (const token of sentence.tokens) {
          freq.set(token, (freq.get(token) ?? 0) + 1);
        }
      }
    }
    const kept = [...freq.entries()].filter(([, n]) => n >= minFreq);
    kept.sort((a, b) => (b[1] - a[1]) || (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0));
    const index = new Map<string, number>([
      [PAD_TOKEN, PAD],
      [UNK_TOKEN, UNK],
    ]);
    for (const [token] of kept) index.set(token, index.size);
    if (index.size === 2) throw new Error("empty vocabulary: no training tokens");
    return new Vocab(index);
  }

  lookup(token: string): number {
    return this.index.get(token) ?? UNK;
  }

  get size(): number {
    return this.index.size;
  }
}

/** The training corpus's tag strings; "O" is always id 0. */
export class TagInventory {
  readonly tags: string[];
  readonly index: Map<string, number>;

  constructor(tags: string[]) {
    this.tags = tags;
    this.index = new Map(tags.map((t, i) => [t, i]));
  }

  static fromCorpus(corpus: TaggedSentence[]): TagInventory {
    const seen = new Set<string>(["O"]);
    for (const sentence of corpus) for (const tag of sentence.tags) seen.add(tag);
    const rest = [...seen].filter((t) => t !== "O").sort();
    return new TagInventory(["O", ...rest]);
  }

  encode(tag: string): number {
    const id = this.index.get(tag);
    if (id === undefined) throw new Error(`tag ${tag} not in training inventory`);
    return id;
  }

  get size(): number {
    return this.tags.length;
  }
}

/** One padded batch: row-per-sentence, mask 0 on padding positions. */
export interface Batch {
  ids: Int32Array[];
  targets: Int32Array[];
  mask: Uint8Array[];
}

export function encodeSentence(sentence: TaggedSentence, vocab: Vocab, tagInv: TagInventory): {
  ids: Int32Array;
  targets: Int32Array;
} {
  const ids = new Int32Array(sentence.tokens.length);
  const targets = new Int32Array(sentence.tokens.length);
  for (let t = 0; t < sentence.tokens.length; t++) {
    ids[t] = vocab.lookup(sentence.tokens[t]);
    targets[t] = tagInv.encode(sentence.tags[t]);
  }
  return { ids, targets };
}

export function makeBatches(
  corpus: TaggedSentence[],
  vocab: Vocab,
  tagInv: TagInventory,
  batchSize: number,
  rng?: Rng,
): Batch[] {
  const order = corpus.map((_, i) => i);
  if (rng) rng.shuffle(order);
  const batches: Batch[] = [];
  for (let at = 0; at < order.length; at += batchSize) {
    const chunk = order.slice(at, at + batchSize);
    const rows = chunk.map((i) => encodeSentence(corpus[i], vocab, tagInv));
    const width = Math.max(...chunk.map((i) => corpus[i].tokens.length));
    const ids: Int32Array[] = [];
    const targets: Int32Array[] = [];
    const mask: Uint8Array[] = [];
    for (const row of rows) {
      const idRow = new Int32Array(width).fill(PAD);
      const targetRow = new Int32Array(width);
      const maskRow = new Uint8Array(width);
      idRow.set(row.ids);
      targetRow.set(row.targets);
      maskRow.fill(1, 0, row.ids.length);
      ids.push(idRow);
      targets.push(targetRow);
      mask.push(maskRow);
    }
    batches.push({ ids, targets, mask });
  }
  return batches;
}
