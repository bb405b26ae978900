/** BiLSTM tagger with hand-rolled backpropagation.
 *
 * Architecture: embedding -> dropout -> BiLSTM (one layer per direction,
 * hidden size H per direction) -> dropout -> linear projection to the tag
 * inventory. Cross-entropy loss averaged over non-padding positions only;
 * padding positions are skipped outright in both directions of the LSTM
 * (state passes through unchanged), so a padded batch computes exactly the
 * same loss as its unpadded equivalent.
 */

import { Batch } from "./data.js";
import { Rng } from "./rng.js";

export interface TrainerConfig {
  embeddingDim: number;
  lstmHidden: number; // per direction
  dropout: number; // applied before and after the BiLSTM
  learningRate: number;
  batchSize: number;
  epochs: number;
  gradClipMaxNorm: number;
  minFreq: number;
  seed: number;
}

export const DEFAULT_CONFIG: TrainerConfig = {
  embeddingDim: 100,
  lstmHidden: 100,
  dropout: 0.5,
  learningRate: 0.001,
  batchSize: 32,
  epochs: 15,
  gradClipMaxNorm: 5,
  minFreq: 1,
  seed: 13,
};

const INIT_SCALE = 0.08;

export class Param {
  readonly data: Float64Array;
  readonly grad: Float64Array;

  constructor(
    readonly name: string,
    readonly rows: number,
    readonly cols: number,
  ) {
    this.data = new Float64Array(rows * cols);
    this.grad = new Float64Array(rows * cols);
  }

  static random(name: string, rows: number, cols: number, rng: Rng): Param {
    const p = new Param(name, rows, cols);
    for (let i = 0; i < p.data.length; i++) p.data[i] = rng.uniform(-INIT_SCALE, INIT_SCALE);
    return p;
  }

  zeroGrad(): void {
    this.grad.fill(0);
  }
}

/** out = W x (W is rows x cols, x has length cols). */
function matvec(w: Param, x: Float64Array, out: Float64Array): void {
  const { rows, cols, data } = w;
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    const base = r * cols;
    for (let c = 0; c < cols; c++) acc += data[base + c] * x[c];
    out[r] = acc;
  }
}

/** dx += W^T dOut and W.grad += dOut x^T, fused. */
function matvecBackward(w: Param, x: Float64Array, dOut: Float64Array, dx: Float64Array | null): void {
  const { rows, cols, grad, data } = w;
  for (let r = 0; r < rows; r++) {
    const d = dOut[r];
    if (d === 0) continue;
    const base = r * cols;
    for (let c = 0; c < cols; c++) {
      grad[base + c] += d * x[c];
      if (dx) dx[c] += data[base + c] * d;
    }
  }
}

function sigmoid(x: number): number {
  return 1 / (1 + Math.exp(-x));
}

export interface LstmParams {
  wx: Param; // 4H x D
  wh: Param; // 4H x H
  b: Param; // 4H x 1
}

export function initLstm(prefix: string, inputDim: number, hidden: number, rng: Rng): LstmParams {
  return {
    wx: Param.random(`${prefix}.wx`, 4 * hidden, inputDim, rng),
    wh: Param.random(`${prefix}.wh`, 4 * hidden, hidden, rng),
    b: new Param(`${prefix}.b`, 4 * hidden, 1),
  };
}

interface LstmStepCache {
  skipped: boolean;
  x: Float64Array;
  hPrev: Float64Array;
  cPrev: Float64Array;
  i: Float64Array;
  f: Float64Array;
  o: Float64Array;
  g: Float64Array;
  tc: Float64Array;
}

interface LstmCache {
  order: number[];
  steps: LstmStepCache[]; // indexed by processing order
  hidden: number;
}

/** Run one LSTM direction over a (possibly padded) sentence.
 *
 * `order` is the processing order of positions (ascending for the forward
 * direction, descending for the backward one). Masked positions are skipped:
 * state passes through unchanged and the output hidden vector is zero, so
 * padding can never influence real positions.
 */
export function lstmForward(
  p: LstmParams,
  xs: Float64Array[],
  mask: Uint8Array,
  order: number[],
  hs: Float64Array[],
): LstmCache {
  const hidden = p.wh.cols;
  let hPrev: Float64Array = new Float64Array(hidden);
  let cPrev: Float64Array = new Float64Array(hidden);
  const steps: LstmStepCache[] = [];
  const z = new Float64Array(4 * hidden);
  const zh = new Float64Array(4 * hidden);
  for (const t of order) {
    if (!mask[t]) {
      steps.push({ skipped: true } as LstmStepCache);
      hs[t].fill(0);
      continue;
    }
    const x = xs[t];
    matvec(p.wx, x, z);
    matvec(p.wh, hPrev, zh);
    const i = new Float64Array(hidden);
    const f = new Float64Array(hidden);
    const o = new Float64Array(hidden);
    const g = new Float64Array(hidden);
    const c = new Float64Array(hidden);
    const tc = new Float64Array(hidden);
    const h = hs[t];
    for (let j = 0; j < hidden; j++) {
      i[j] = sigmoid(z[j] + zh[j] + p.b.data[j]);
      f[j] = sigmoid(z[hidden + j] + zh[hidden + j] + p.b.data[hidden + j]);
      o[j] = sigmoid(z[2 * hidden + j] + zh[2 * hidden + j] + p.b.data[2 * hidden + j]);
      g[j] = Math.tanh(z[3 * hidden + j] + zh[3 * hidden + j] + p.b.data[3 * hidden + j]);
      c[j] = f[j] * cPrev[j] + i[j] * g[j];
      tc[j] = Math.tanh(c[j]);
      h[j] = o[j] * tc[j];
    }
    steps.push({ skipped: false, x, hPrev, cPrev, i, f, o, g, tc });
    hPrev = h;
    cPrev = c;
  }
  return { order, steps, hidden };
}

/** Backprop one direction; accumulates into parameter grads and dxs. */
export function lstmBackward(
  p: LstmParams,
  cache: LstmCache,
  dhs: Float64Array[],
  dxs: Float64Array[],
): void {
  const { hidden } = cache;
  let dhNext: Float64Array = new Float64Array(hidden);
  let dcNext: Float64Array = new Float64Array(hidden);
  const dz = new Float64Array(4 * hidden);
  for (let step = cache.steps.length - 1; step >= 0; step--) {
    const t = cache.order[step];
    const s = cache.steps[step];
    if (s.skipped) continue; // zero output, state passed through: dhNext/dcNext flow on
    const dh = new Float64Array(hidden);
    for (let j = 0; j < hidden; j++) dh[j] = dhs[t][j] + dhNext[j];
    const dcPrev = new Float64Array(hidden);
    for (let j = 0; j < hidden; j++) {
      const doj = dh[j] * s.tc[j];
      const dtc = dh[j] * s.o[j];
      const dc = dcNext[j] + dtc * (1 - s.tc[j] * s.tc[j]);
      const dij = dc * s.g[j];
      const dfj = dc * s.cPrev[j];
      const dgj = dc * s.i[j];
      dcPrev[j] = dc * s.f[j];
      dz[j] = dij * s.i[j] * (1 - s.i[j]);
      dz[hidden + j] = dfj * s.f[j] * (1 - s.f[j]);
      dz[2 * hidden + j] = doj * s.o[j] * (1 - s.o[j]);
      dz[3 * hidden + j] = dgj * (1 - s.g[j] * s.g[j]);
    }
    matvecBackward(p.wx, s.x, dz, dxs[t]);
    const dhPrev = new Float64Array(hidden);
    matvecBackward(p.wh, s.hPrev, dz, dhPrev);
    for (let j = 0; j < 4 * hidden; j++) p.b.grad[j] += dz[j];
    dhNext = dhPrev;
    dcNext = dcPrev;
  }
}

export interface SharedParts {
  embedding?: Param;
  lstmForward?: LstmParams;
  lstmBackwardDir?: LstmParams;
}

export interface StepStats {
  loss: number;
  tokens: number;
}

export class Tagger {
  readonly embedding: Param;
  readonly fwd: LstmParams;
  readonly bwd: LstmParams;
  readonly outW: Param;
  readonly outB: Param;

  constructor(
    readonly cfg: TrainerConfig,
    vocabSize: number,
    readonly tagCount: number,
    rng: Rng,
    shared: SharedParts = {},
  ) {
    const { embeddingDim, lstmHidden } = cfg;
    this.embedding = shared.embedding ?? Param.random("emb", vocabSize, embeddingDim, rng);
    this.fwd = shared.lstmForward ?? initLstm("lstm_f", embeddingDim, lstmHidden, rng);
    this.bwd = shared.lstmBackwardDir ?? initLstm("lstm_b", embeddingDim, lstmHidden, rng);
    this.outW = Param.random("out.w", tagCount, 2 * lstmHidden, rng);
    this.outB = new Param("out.b", tagCount, 1);
  }

  parameters(): Param[] {
    return [
      this.embedding,
      this.fwd.wx, this.fwd.wh, this.fwd.b,
      this.bwd.wx, this.bwd.wh, this.bwd.b,
      this.outW, this.outB,
    ];
  }

  zeroGrads(): void {
    for (const p of this.parameters()) p.zeroGrad();
  }

  /** Mean cross-entropy over non-padding positions of a batch.
   *
   * In training mode also accumulates gradients (caller zeroes them) and
   * applies inverted dropout before and after the BiLSTM.
   */
  lossBatch(batch: Batch, train: boolean, dropRng?: Rng): StepStats {
    const { dropout, lstmHidden, embeddingDim } = this.cfg;
    const keep = 1 - dropout;
    let totalTokens = 0;
    for (const row of batch.mask) for (const m of row) if (m) totalTokens += 1;
    if (totalTokens === 0) return { loss: 0, tokens: 0 };

    let lossSum = 0;
    for (let row = 0; row < batch.ids.length; row++) {
      const ids = batch.ids[row];
      const targets = batch.targets[row];
      const mask = batch.mask[row];
      const width = ids.length;

      // embedding lookup + input dropout
      const xs: Float64Array[] = [];
      const inDrop: Float64Array[] = [];
      for (let t = 0; t < width; t++) {
        const x = new Float64Array(embeddingDim);
        if (mask[t]) {
          const base = ids[t] * embeddingDim;
          for (let j = 0; j < embeddingDim; j++) x[j] = this.embedding.data[base + j];
          if (train && dropout > 0 && dropRng) {
            const dm = new Float64Array(embeddingDim);
            for (let j = 0; j < embeddingDim; j++) {
              dm[j] = dropRng.next() < keep ? 1 / keep : 0;
              x[j] *= dm[j];
            }
            inDrop.push(dm);
          } else {
            inDrop.push(new Float64Array(0));
          }
        } else {
          inDrop.push(new Float64Array(0));
        }
        xs.push(x);
      }

      const forwardOrder = [...Array(width).keys()];
      const backwardOrder = [...forwardOrder].reverse();
      const hF: Float64Array[] = forwardOrder.map(() => new Float64Array(lstmHidden));
      const hB: Float64Array[] = forwardOrder.map(() => new Float64Array(lstmHidden));
      const cacheF = lstmForward(this.fwd, xs, mask, forwardOrder, hF);
      const cacheB = lstmForward(this.bwd, xs, mask, backwardOrder, hB);

      // concat + output dropout, then logits and softmax CE
      const h2: Float64Array[] = [];
      const outDrop: Float64Array[] = [];
      const dh2: Float64Array[] = [];
      const probs: Float64Array[] = [];
      for (let t = 0; t < width; t++) {
        const h = new Float64Array(2 * lstmHidden);
        dh2.push(new Float64Array(2 * lstmHidden));
        if (!mask[t]) {
          h2.push(h);
          outDrop.push(new Float64Array(0));
          probs.push(new Float64Array(0));
          continue;
        }
        h.set(hF[t], 0);
        h.set(hB[t], lstmHidden);
        if (train && dropout > 0 && dropRng) {
          const dm = new Float64Array(2 * lstmHidden);
          for (let j = 0; j < 2 * lstmHidden; j++) {
            dm[j] = dropRng.next() < keep ? 1 / keep : 0;
            h[j] *= dm[j];
          }
          outDrop.push(dm);
        } else {
          outDrop.push(new Float64Array(0));
        }
        h2.push(h);
        const logits = new Float64Array(this.tagCount);
        matvec(this.outW, h, logits);
        for (let k = 0; k < this.tagCount; k++) logits[k] += this.outB.data[k];
        let max = -Infinity;
        for (const v of logits) if (v > max) max = v;
        let z = 0;
        for (let k = 0; k < this.tagCount; k++) {
          logits[k] = Math.exp(logits[k] - max);
          z += logits[k];
        }
        for (let k = 0; k < this.tagCount; k++) logits[k] /= z;
        probs.push(logits);
        lossSum += -Math.log(Math.max(probs[t][targets[t]], 1e-300));
      }

      if (!train) continue;

      // backward: output layer
      for (let t = 0; t < width; t++) {
        if (!mask[t]) continue;
        const dLogits = new Float64Array(this.tagCount);
        for (let k = 0; k < this.tagCount; k++) {
          dLogits[k] = (probs[t][k] - (k === targets[t] ? 1 : 0)) / totalTokens;
        }
        matvecBackward(this.outW, h2[t], dLogits, dh2[t]);
        for (let k = 0; k < this.tagCount; k++) this.outB.grad[k] += dLogits[k];
        if (outDrop[t].length > 0) {
          for (let j = 0; j < dh2[t].length; j++) dh2[t][j] *= outDrop[t][j];
        }
      }

      // split concat grads and run both directions
      const dhF = forwardOrder.map((t) => dh2[t].subarray(0, lstmHidden));
      const dhB = forwardOrder.map((t) => dh2[t].subarray(lstmHidden));
      const dxs = forwardOrder.map(() => new Float64Array(embeddingDim));
      lstmBackward(this.fwd, cacheF, dhF, dxs);
      lstmBackward(this.bwd, cacheB, dhB, dxs);

      // input dropout + embedding table
      for (let t = 0; t < width; t++) {
        if (!mask[t]) continue;
        if (inDrop[t].length > 0) {
          for (let j = 0; j < embeddingDim; j++) dxs[t][j] *= inDrop[t][j];
        }
        const base = ids[t] * embeddingDim;
        for (let j = 0; j < embeddingDim; j++) this.embedding.grad[base + j] += dxs[t][j];
      }
    }

    return { loss: lossSum / totalTokens, tokens: totalTokens };
  }

  /** Greedy per-token argmax tag ids; dropout disabled. */
  predict(ids: Int32Array): number[] {
    const width = ids.length;
    const mask = new Uint8Array(width).fill(1);
    const { lstmHidden, embeddingDim } = this.cfg;
    const xs: Float64Array[] = [];
    for (let t = 0; t < width; t++) {
      const x = new Float64Array(embeddingDim);
      const base = ids[t] * embeddingDim;
      for (let j = 0; j < embeddingDim; j++) x[j] = this.embedding.data[base + j];
      xs.push(x);
    }
    const forwardOrder = [...Array(width).keys()];
    const hF = forwardOrder.map(() => new Float64Array(lstmHidden));
    const hB = forwardOrder.map(() => new Float64Array(lstmHidden));
    lstmForward(this.fwd, xs, mask, forwardOrder, hF);
    lstmForward(this.bwd, xs, mask, [...forwardOrder].reverse(), hB);
    const out: number[] = [];
    const h = new Float64Array(2 * lstmHidden);
    const logits = new Float64Array(this.tagCount);
    for (let t = 0; t < width; t++) {
      h.set(hF[t], 0);
      h.set(hB[t], lstmHidden);
      matvec(this.outW, h, logits);
      let best = 0;
      let bestVal = logits[0] + this.outB.data[0];
      for (let k = 1; k < this.tagCount; k++) {
        const v = logits[k] + this.outB.data[k];
        if (v > bestVal) {
          bestVal = v;
          best = k;
        }
      }
      out.push(best);
    }
    return out;
  }
}
