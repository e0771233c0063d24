/**
 * The 2-3-2 sigmoid network with backpropagation, operation-for-operation
 * identical to the coordinator's client (PROTOCOL.md section 3.4 is the
 * contract; fixtures/train_vectors.json pins both gradient modes).
 *
 * Accumulation order inside every loop is deliberate - do not reorder.
 */

import { exp } from "./fexp";

export const N_INPUT = 2;
export const N_HIDDEN = 3;
export const N_OUTPUT = 2;
export const N_WEIGHTS = 17;

export type Matrix = number[][];

export interface Weights {
  wInput: Matrix; // 3 rows x [in0, in1, bias]
  wHidden: Matrix; // 2 rows x [h0, h1, h2, bias]
}

export type GradientMode = "chained" | "classic";

export interface Sample {
  input: [number, number];
  target: [number, number];
}

export function weightsFromFlat(values: readonly number[]): Weights {
  if (values.length !== N_WEIGHTS) {
    throw new Error(`expected ${N_WEIGHTS} weights, got ${values.length}`);
  }
  const v = values;
  return {
    wInput: [
      [v[0], v[1], v[2]],
      [v[3], v[4], v[5]],
      [v[6], v[7], v[8]],
    ],
    wHidden: [
      [v[9], v[10], v[11], v[12]],
      [v[13], v[14], v[15], v[16]],
    ],
  };
}

export function weightsToFlat(w: Weights): number[] {
  return [...w.wInput.flat(), ...w.wHidden.flat()];
}

export function sigmoid(x: number): number {
  return 1.0 / (1.0 + exp(-x));
}

export function forwardLayer(activations: readonly number[], layer: Matrix): number[] {
  const n = activations.length;
  const outs: number[] = [];
  for (const row of layer) {
    if (row.length !== n + 1) throw new Error("forwardLayer: dimension mismatch");
    let acc = 0.0;
    for (let i = 0; i < n; i++) acc += activations[i] * row[i];
    acc += row[n]; // bias column, virtual input 1.0
    outs.push(acc);
  }
  return outs;
}

export function outputError(outputs: readonly number[], targets: readonly number[]): number[] {
  if (outputs.length !== targets.length) throw new Error("outputError: length mismatch");
  return outputs.map((o, i) => o * (1.0 - o) * (o - targets[i]));
}

export function backpropLayer(
  inputs: readonly number[],
  deltas: readonly number[],
  layer: Matrix,
): Matrix {
  if (deltas.length !== layer.length) throw new Error("backpropLayer: dimension mismatch");
  const extended = [...inputs, 1.0];
  return layer.map((row, r) => {
    if (row.length !== extended.length) throw new Error("backpropLayer: dimension mismatch");
    return row.map((w, j) => w - deltas[r] * extended[j]);
  });
}

export function hiddenError(
  hiddenOuts: readonly number[],
  outputDeltas: readonly number[],
  wHiddenUsed: Matrix,
): number[] {
  const deltas: number[] = [];
  for (let h = 0; h < hiddenOuts.length; h++) {
    let acc = 0.0;
    for (let k = 0; k < outputDeltas.length; k++) {
      acc += outputDeltas[k] * wHiddenUsed[k][h];
    }
    deltas.push(acc * hiddenOuts[h] * (1.0 - hiddenOuts[h]));
  }
  return deltas;
}

export function trainEpoch(
  sample: Sample,
  weights: Weights,
  mode: GradientMode,
): { deltas: number[]; weights: Weights } {
  const hiddenOut = forwardLayer(sample.input, weights.wInput).map(sigmoid);
  const outputOut = forwardLayer(hiddenOut, weights.wHidden).map(sigmoid);
  const deltasOut = outputError(outputOut, sample.target);
  const wHiddenNew = backpropLayer(hiddenOut, deltasOut, weights.wHidden);
  const deltasHidden =
    mode === "chained"
      ? hiddenError(hiddenOut, deltasOut, wHiddenNew)
      : hiddenError(hiddenOut, deltasOut, weights.wHidden);
  const wInputNew = backpropLayer(sample.input, deltasHidden, weights.wInput);
  return { deltas: deltasOut, weights: { wInput: wInputNew, wHidden: wHiddenNew } };
}

export function trainBatch(
  samples: readonly Sample[],
  weights: Weights,
  mode: GradientMode,
): { errors: number[][]; weights: Weights } {
  const errors: number[][] = [];
  let w = weights;
  for (const s of samples) {
    const step = trainEpoch(s, w, mode);
    errors.push(step.deltas);
    w = step.weights;
  }
  return { errors, weights: w };
}
