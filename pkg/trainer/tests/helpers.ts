import { TaggedSentence, TagInventory, Vocab, makeBatches } from "../src/data.js";
import { DEFAULT_CONFIG, TrainerConfig } from "../src/model.js";

/** 32-sentence fixture where the token alone determines the tag. */
export function toyCorpus(): TaggedSentence[] {
  const malware = ["emotet", "dridex", "lojax", "xagent"];
  const orgs = ["apt28", "lazarus", "turla", "oilrig"];
  const fillers = ["the", "group", "deployed", "against", "targets", "via", "email", "new"];
  const sentences: TaggedSentence[] = [];
  let k = 0;
  for (let i = 0; i < 32; i++) {
    const next = () => fillers[k++ % fillers.length];
    sentences.push({
      tokens: [orgs[(i >> 2) % 4], next(), next(), malware[i % 4], next(), next()],
      tags: ["B-Organization", "O", "O", "B-Malware", "O", "O"],
    });
  }
  return sentences;
}

/** Tiny dimensions so unit tests stay fast. */
export function smallConfig(overrides: Partial<TrainerConfig> = {}): TrainerConfig {
  return {
    ...DEFAULT_CONFIG,
    embeddingDim: 8,
    lstmHidden: 6,
    dropout: 0,
    batchSize: 4,
    epochs: 2,
    ...overrides,
  };
}

export function firstBatch(corpus: TaggedSentence[], cfg: TrainerConfig) {
  const vocab = Vocab.build([corpus], cfg.minFreq);
  const tagInv = TagInventory.fromCorpus(corpus);
  const batches = makeBatches(corpus, vocab, tagInv, cfg.batchSize);
  return { vocab, tagInv, batch: batches[0] };
}
