/** Adam optimizer and global-norm gradient clipping. */

import { Param } from "./model.js";

interface AdamSlot {
  m: Float64Array;
  v: Float64Array;
  t: number;
}

export class Adam {
  private slots = new Map<Param, AdamSlot>();

  constructor(
    readonly lr: number,
    readonly beta1 = 0.9,
    readonly beta2 = 0.999,
    readonly eps = 1e-8,
  ) {}

  /** Apply one update to every parameter in `params` using its .grad. */
  step(params: Param[]): void {
    for (const p of params) {
      let slot = this.slots.get(p);
      if (!slot) {
        slot = { m: new Float64Array(p.data.length), v: new Float64Array(p.data.length), t: 0 };
        this.slots.set(p, slot);
      }
      slot.t += 1;
      const bc1 = 1 - Math.pow(this.beta1, slot.t);
      const bc2 = 1 - Math.pow(this.beta2, slot.t);
      for (let i = 0; i < p.data.length; i++) {
        const g = p.grad[i];
        slot.m[i] = this.beta1 * slot.m[i] + (1 - this.beta1) * g;
        slot.v[i] = this.beta2 * slot.v[i] + (1 - this.beta2) * g * g;
        const mHat = slot.m[i] / bc1;
        const vHat = slot.v[i] / bc2;
        p.data[i] -= (this.lr * mHat) / (Math.sqrt(vHat) + this.eps);
      }
    }
  }
}

export function globalGradNorm(params: Param[]): number {
  let sq = 0;
  for (const p of params) for (const g of p.grad) sq += g * g;
  return Math.sqrt(sq);
}

/** Scale all gradients so the global norm is at most maxNorm.
 *
 * Returns the post-clip norm.
 */
export function clipGlobalNorm(params: Param[], maxNorm: number): number {
  const norm = globalGradNorm(params);
  if (norm > maxNorm) {
    const scale = maxNorm / (norm + 1e-12);
    for (const p of params) for (let i = 0; i < p.grad.length; i++) p.grad[i] *= scale;
    return globalGradNorm(params);
  }
  return norm;
}
