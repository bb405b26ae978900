#!/usr/bin/env node
/** Trainer CLI.
 *
 *   cyner-trainer train --mode single   --dataset DNRTI --config exp.json [--seed 3]
 *   cyner-trainer train --mode combined --config exp.json
 *   cyner-trainer train --mode multihead --sharing emb --config exp.json
 *
 * Config (JSON, paths relative to the file):
 *   {
 *     "model": { "epochs": 15, "dropout": 0.5, ... },        // optional overrides
 *     "datasets": { "DNRTI": { "train": "...", "dev": "..." }, ... },
 *     "combined_train": "combined/combined_train.conll",      // mode=combined
 *     "out_dir": "preds"
 *   }
 *
 * Emits <TRAIN>__<EVAL>.tsv prediction files for the scorer plus a
 * train_log_*.jsonl (one {epoch, loss, devF1} object per line).
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { TaggedSentence, parseConll } from "./data.js";
import { DEFAULT_CONFIG, TrainerConfig } from "./model.js";
import {
  HeadSpec,
  SharingMode,
  emitPredictions,
  trainMultihead,
  trainSingle,
} from "./trainer.js";

interface DatasetPaths {
  train: string;
  dev?: string;
}

interface ExperimentFile {
  model?: Partial<Record<string, number>>;
  datasets: Record<string, DatasetPaths>;
  combined_train?: string;
  out_dir?: string;
}

function fail(code: number, message: string): never {
  process.stderr.write(`cyner-trainer: ${message}\n`);
  process.exit(code);
}

function loadCorpus(file: string): TaggedSentence[] {
  return parseConll(fs.readFileSync(file, "utf-8"));
}

const MODEL_KEYS: Record<string, keyof TrainerConfig> = {
  embedding_dim: "embeddingDim",
  lstm_hidden: "lstmHidden",
  dropout: "dropout",
  learning_rate: "learningRate",
  batch_size: "batchSize",
  epochs: "epochs",
  grad_clip_max_norm: "gradClipMaxNorm",
  min_freq: "minFreq",
  seed: "seed",
};

function resolveConfig(spec: ExperimentFile, seedOverride: number | null): TrainerConfig {
  const cfg: TrainerConfig = { ...DEFAULT_CONFIG };
  for (const [key, value] of Object.entries(spec.model ?? {})) {
    const mapped = MODEL_KEYS[key];
    if (!mapped) fail(1, `unknown model option ${key}`);
    (cfg as unknown as Record<string, number>)[mapped] = value as number;
  }
  const envSeed = process.env.NER_UNIFY_SEED;
  if (envSeed !== undefined) cfg.seed = Number.parseInt(envSeed, 10);
  if (seedOverride !== null) cfg.seed = seedOverride;
  if (!Number.isFinite(cfg.seed)) fail(1, "seed is not a number");
  return cfg;
}

function writeLog(file: string, log: object[]): void {
  fs.writeFileSync(file, log.map((entry) => JSON.stringify(entry)).join("\n") + "\n");
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        mode: { type: "string" },
        sharing: { type: "string" },
        config: { type: "string" },
        seed: { type: "string" },
        dataset: { type: "string" },
      },
    });
  } catch (err) {
    fail(1, (err as Error).message);
  }
  const { values, positionals } = parsed;
  if (positionals[0] !== "train") fail(1, "usage: cyner-trainer train --mode ... --config <file>");
  const mode = values.mode ?? "single";
  if (!["single", "combined", "multihead"].includes(mode)) fail(1, `unknown mode ${mode}`);
  if (!values.config) fail(1, "--config is required");

  let spec: ExperimentFile;
  let base: string;
  try {
    spec = JSON.parse(fs.readFileSync(values.config, "utf-8")) as ExperimentFile;
    base = path.dirname(path.resolve(values.config));
  } catch (err) {
    fail(2, `cannot read config: ${(err as Error).message}`);
  }
  const seedOverride = values.seed !== undefined ? Number.parseInt(values.seed, 10) : null;
  const cfg = resolveConfig(spec, seedOverride);
  const outDir = path.resolve(base, spec.out_dir ?? "preds");
  fs.mkdirSync(outDir, { recursive: true });

  const resolve = (p: string) => path.resolve(base, p);
  const datasetNames = Object.keys(spec.datasets ?? {});
  if (datasetNames.length === 0) fail(1, "config lists no datasets");

  const devs = new Map<string, TaggedSentence[]>();
  for (const name of datasetNames) {
    const devPath = spec.datasets[name].dev;
    if (devPath) devs.set(name, loadCorpus(resolve(devPath)));
  }

  try {
    if (mode === "single" || mode === "combined") {
      let trainName: string;
      let trainCorpus: TaggedSentence[];
      if (mode === "single") {
        trainName = values.dataset ?? (datasetNames.length === 1 ? datasetNames[0] : "");
        if (!trainName) fail(1, "--dataset is required with more than one configured dataset");
        if (!spec.datasets[trainName]) fail(1, `unknown dataset ${trainName}`);
        trainCorpus = loadCorpus(resolve(spec.datasets[trainName].train));
      } else {
        if (!spec.combined_train) fail(1, "combined mode needs combined_train in the config");
        trainName = "COMBINED";
        trainCorpus = loadCorpus(resolve(spec.combined_train));
      }
      const ownDev = devs.get(trainName) ?? null;
      const result = trainSingle(trainCorpus, ownDev, cfg);
      writeLog(path.join(outDir, `train_log_${trainName}.jsonl`), result.log);
      for (const [evalName, dev] of devs) {
        const text = emitPredictions(result.model, dev, result.vocab, result.tagInv);
        fs.writeFileSync(path.join(outDir, `${trainName}__${evalName}.tsv`), text);
      }
    } else {
      const sharing = (values.sharing ?? "both") as SharingMode;
      if (!["none", "emb", "lstm", "both"].includes(sharing)) {
        fail(1, `unknown sharing mode ${sharing}`);
      }
      const specs: HeadSpec[] = datasetNames.map((name) => ({
        name,
        train: loadCorpus(resolve(spec.datasets[name].train)),
        dev: devs.get(name) ?? null,
      }));
      const result = trainMultihead(specs, sharing, cfg);
      const subDir = path.join(outDir, `multihead_${sharing}`);
      fs.mkdirSync(subDir, { recursive: true });
      writeLog(path.join(subDir, "train_log.jsonl"), result.log);
      for (const head of specs) {
        const dev = devs.get(head.name);
        if (!dev) continue;
        const text = emitPredictions(
          result.heads.get(head.name)!,
          dev,
          result.vocab,
          result.tagInvs.get(head.name)!,
        );
        fs.writeFileSync(path.join(subDir, `${head.name}__${head.name}.tsv`), text);
      }
    }
  } catch (err) {
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      fail(2, (err as Error).message);
    }
    fail(1, (err as Error).message);
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
