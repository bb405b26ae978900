/** BIO2 tag utilities: repair, span decoding, strict span F1 (for dev logs). */

export interface Span {
  start: number;
  end: number; // exclusive
  label: string;
}

function labelOf(tag: string): string | null {
  if (tag.length > 2 && tag[1] === "-" && (tag[0] === "B" || tag[0] === "I")) {
    return tag.slice(2);
  }
  return null;
}

/** Rewrite orphan or mismatched I-X tags to B-X; identity on valid input. */
export function repairBio2(tags: string[]): string[] {
  const out: string[] = [];
  let prev: string | null = null;
  for (const tag of tags) {
    if (tag === "O") {
      prev = null;
      out.push(tag);
      continue;
    }
    const label = labelOf(tag);
    if (label === null) throw new Error(`malformed BIO2 tag: ${tag}`);
    if (tag[0] === "B") {
      prev = label;
      out.push(tag);
    } else {
      out.push(prev === label ? tag : `B-${label}`);
      prev = label;
    }
  }
  return out;
}

/** Decode spans from a valid (e.g. repaired) sequence. */
export function extractSpans(tags: string[]): Span[] {
  const spans: Span[] = [];
  let start = -1;
  let label: string | null = null;
  for (let i = 0; i < tags.length; i++) {
    const tag = tags[i];
    if (tag === "O" || tag[0] === "B") {
      if (label !== null) spans.push({ start, end: i, label });
      label = null;
      if (tag[0] === "B") {
        start = i;
        label = tag.slice(2);
      }
      continue;
    }
    // I- continuing the open span; sequences are repaired before decoding
  }
  if (label !== null) spans.push({ start, end: tags.length, label });
  return spans;
}

/** Micro-averaged strict span F1 over a corpus of tag sequences. */
export function strictSpanF1(gold: string[][], pred: string[][]): {
  precision: number;
  recall: number;
  f1: number;
} {
  let tp = 0;
  let nGold = 0;
  let nPred = 0;
  for (let s = 0; s < gold.length; s++) {
    const goldSpans = extractSpans(repairBio2(gold[s]));
    const predSpans = extractSpans(repairBio2(pred[s]));
    nGold += goldSpans.length;
    nPred += predSpans.length;
    const keys = new Set(goldSpans.map((x) => `${x.start}:${x.end}:${x.label}`));
    for (const p of predSpans) {
      if (keys.has(`${p.start}:${p.end}:${p.label}`)) tp += 1;
    }
  }
  const fp = nPred - tp;
  const fn = nGold - tp;
  const precision = tp + fp > 0 ? tp / (tp + fp) : fn === 0 ? 1 : 0;
  const recall = tp + fn > 0 ? tp / (tp + fn) : fp === 0 ? 1 : 0;
  const f1 = precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
  return { precision, recall, f1 };
}
