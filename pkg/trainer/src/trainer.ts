/** Training loops: single-dataset/combined models and the multi-head
 * weight-sharing variants; prediction-file emission for the scorer.
 */

import { Adam, clipGlobalNorm } from "./adam.js";
import { repairBio2, strictSpanF1 } from "./bio2.js";
import {
  Batch,
  TaggedSentence,
  TagInventory,
  Vocab,
  encodeSentence,
  makeBatches,
  writePredictionFile,
} from "./data.js";
import { Param, SharedParts, Tagger, TrainerConfig, initLstm } from "./model.js";
import { Rng } from "./rng.js";

export type SharingMode = "none" | "emb" | "lstm" | "both";

export interface EpochLog {
  epoch: number;
  loss: number;
  devF1: number | null;
  [key: string]: number | null;
}

export interface StepResult {
  loss: number;
  gradNorm: number;
}

/** One optimizer step over a batch for one model; returns loss + post-clip norm. */
export function trainStep(
  model: Tagger,
  batch: Batch,
  optimizer: Adam,
  cfg: TrainerConfig,
  dropRng: Rng,
): StepResult {
  model.zeroGrads();
  const { loss } = model.lossBatch(batch, true, dropRng);
  const gradNorm = clipGlobalNorm(model.parameters(), cfg.gradClipMaxNorm);
  optimizer.step(model.parameters());
  return { loss, gradNorm };
}

export function predictCorpus(model: Tagger, corpus: TaggedSentence[], vocab: Vocab, tagInv: TagInventory): string[][] {
  const out: string[][] = [];
  for (const sentence of corpus) {
    const ids = new Int32Array(sentence.tokens.length);
    for (let t = 0; t < ids.length; t++) ids[t] = vocab.lookup(sentence.tokens[t]);
    const tagIds = model.predict(ids);
    out.push(repairBio2(tagIds.map((k) => tagInv.tags[k])));
  }
  return out;
}

export function devF1(model: Tagger, dev: TaggedSentence[], vocab: Vocab, tagInv: TagInventory): number {
  const pred = predictCorpus(model, dev, vocab, tagInv);
  return strictSpanF1(dev.map((s) => s.tags), pred).f1;
}

export interface SingleResult {
  model: Tagger;
  vocab: Vocab;
  tagInv: TagInventory;
  log: EpochLog[];
}

/** BiLSTM baseline on one (or one combined) training corpus. */
export function trainSingle(
  train: TaggedSentence[],
  dev: TaggedSentence[] | null,
  cfg: TrainerConfig,
): SingleResult {
  const rng = new Rng(cfg.seed);
  const vocab = Vocab.build([train], cfg.minFreq);
  const tagInv = TagInventory.fromCorpus(train);
  const model = new Tagger(cfg, vocab.size, tagInv.size, rng.fork(1));
  const optimizer = new Adam(cfg.learningRate);
  const batchRng = rng.fork(2);
  const dropRng = rng.fork(3);
  const log: EpochLog[] = [];
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const batches = makeBatches(train, vocab, tagInv, cfg.batchSize, batchRng);
    let lossSum = 0;
    for (const batch of batches) {
      lossSum += trainStep(model, batch, optimizer, cfg, dropRng).loss;
    }
    log.push({
      epoch,
      loss: lossSum / Math.max(batches.length, 1),
      devF1: dev ? devF1(model, dev, vocab, tagInv) : null,
    });
  }
  return { model, vocab, tagInv, log };
}

export interface HeadSpec {
  name: string;
  train: TaggedSentence[];
  dev: TaggedSentence[] | null;
}

export interface MultiheadResult {
  heads: Map<string, Tagger>;
  vocab: Vocab;
  tagInvs: Map<string, TagInventory>;
  log: EpochLog[];
}

export function sharedParts(mode: SharingMode, cfg: TrainerConfig, vocabSize: number, rng: Rng): SharedParts {
  const parts: SharedParts = {};
  if (mode === "emb" || mode === "both") {
    parts.embedding = Param.random("emb", vocabSize, cfg.embeddingDim, rng);
  }
  if (mode === "lstm" || mode === "both") {
    parts.lstmForward = initLstm("lstm_f", cfg.embeddingDim, cfg.lstmHidden, rng);
    parts.lstmBackwardDir = initLstm("lstm_b", cfg.embeddingDim, cfg.lstmHidden, rng);
  }
  return parts;
}

/** One output head per dataset over its own label inventory.
 *
 * Parameters designated shared by the mode are literally the same storage
 * across heads. Batches are drawn per dataset, round-robin in declared
 * order (reshuffled every epoch); each step updates that head plus the
 * shared parts.
 */
export function trainMultihead(
  specs: HeadSpec[],
  mode: SharingMode,
  cfg: TrainerConfig,
): MultiheadResult {
  const names = specs.map((s) => s.name);
  if (new Set(names).size !== names.length) {
    throw new Error(`duplicate dataset names: ${names.join(", ")}`);
  }
  if (specs.length < 2) throw new Error("multi-head training needs at least 2 datasets");
  const rng = new Rng(cfg.seed);
  const vocab = Vocab.build(specs.map((s) => s.train), cfg.minFreq);
  const shared = sharedParts(mode, cfg, vocab.size, rng.fork(1));
  const heads = new Map<string, Tagger>();
  const tagInvs = new Map<string, TagInventory>();
  const optimizers = new Map<string, Adam>();
  specs.forEach((spec, k) => {
    const tagInv = TagInventory.fromCorpus(spec.train);
    tagInvs.set(spec.name, tagInv);
    heads.set(spec.name, new Tagger(cfg, vocab.size, tagInv.size, rng.fork(10 + k), shared));
    optimizers.set(spec.name, new Adam(cfg.learningRate));
  });

  const batchRng = rng.fork(2);
  const dropRng = rng.fork(3);
  const log: EpochLog[] = [];
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const queues = new Map<string, Batch[]>();
    for (const spec of specs) {
      queues.set(spec.name, makeBatches(spec.train, vocab, tagInvs.get(spec.name)!, cfg.batchSize, batchRng));
    }
    let lossSum = 0;
    let steps = 0;
    let pending = true;
    while (pending) {
      pending = false;
      for (const spec of specs) {
        const queue = queues.get(spec.name)!;
        const batch = queue.shift();
        if (!batch) continue;
        pending = pending || queue.length > 0;
        lossSum += trainStep(heads.get(spec.name)!, batch, optimizers.get(spec.name)!, cfg, dropRng).loss;
        steps += 1;
      }
    }
    const entry: EpochLog = { epoch, loss: lossSum / Math.max(steps, 1), devF1: null };
    for (const spec of specs) {
      if (spec.dev) {
        entry[`devF1_${spec.name}`] = devF1(
          heads.get(spec.name)!, spec.dev, vocab, tagInvs.get(spec.name)!,
        );
      }
    }
    log.push(entry);
  }
  return { heads, vocab, tagInvs, log };
}

export function emitPredictions(
  model: Tagger,
  evalCorpus: TaggedSentence[],
  vocab: Vocab,
  tagInv: TagInventory,
): string {
  return writePredictionFile(evalCorpus, predictCorpus(model, evalCorpus, vocab, tagInv));
}

/** Token-level accuracy in eval mode (used by the overfit check). */
export function tokenAccuracy(model: Tagger, corpus: TaggedSentence[], vocab: Vocab, tagInv: TagInventory): number {
  let correct = 0;
  let total = 0;
  for (const sentence of corpus) {
    const { ids, targets } = encodeSentence(sentence, vocab, tagInv);
    const pred = model.predict(ids);
    for (let t = 0; t < pred.length; t++) {
      total += 1;
      if (pred[t] === targets[t]) correct += 1;
    }
  }
  return correct / total;
}
