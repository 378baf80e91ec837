/** Plain-array multilayer perceptron with ReLU hidden layers.
 *
 * Matches the interchange format of the verification library: every hidden
 * layer is relu, the final layer is affine ("none"). Training is full-batch
 * gradient descent with momentum; deterministic given a seed.
 */
import { makeNormal, makeRng } from "./rng.js";

export interface LayerData {
  W: number[][]; // rows x cols, row-major
  b: number[];
  activation: "relu" | "none";
}

export interface NetworkData {
  layers: LayerData[];
}

export interface TrainOptions {
  epochs: number;
  learningRate: number;
  momentum: number;
  verbose?: boolean;
}

export interface TrainResult {
  lossTrace: number[];
  diverged: boolean;
}

export class Mlp {
  layers: LayerData[];

  constructor(sizes: number[], seed: number) {
    if (sizes.length < 2) {
      throw new Error("need at least an input and an output size");
    }
    const normal = makeNormal(makeRng(seed));
    this.layers = [];
    for (let i = 0; i + 1 < sizes.length; i++) {
      const rows = sizes[i + 1];
      const cols = sizes[i];
      const scale = Math.sqrt(2 / cols); // He init for relu stacks
      this.layers.push({
        W: Array.from({ length: rows }, () =>
          Array.from({ length: cols }, () => normal() * scale),
        ),
        b: new Array(rows).fill(0),
        activation: i + 2 < sizes.length ? "relu" : "none",
      });
    }
  }

  forward(x: number[]): number[] {
    let v = x;
    for (const layer of this.layers) {
      const out = layer.W.map(
        (row, i) => row.reduce((acc, w, j) => acc + w * v[j], 0) + layer.b[i],
      );
      v = layer.activation === "relu" ? out.map((z) => Math.max(0, z)) : out;
    }
    return v;
  }

  /** Mean squared error over a dataset. */
  loss(inputs: number[][], targets: number[][]): number {
    let sum = 0;
    for (let s = 0; s < inputs.length; s++) {
      const y = this.forward(inputs[s]);
      for (let k = 0; k < y.length; k++) {
        sum += (y[k] - targets[s][k]) ** 2;
      }
    }
    return sum / inputs.length;
  }

  /** Full-batch gradient descent with momentum on the mean squared error. */
  train(
    inputs: number[][],
    targets: number[][],
    opts: TrainOptions,
  ): TrainResult {
    const vel = this.layers.map((l) => ({
      W: l.W.map((row) => row.map(() => 0)),
      b: l.b.map(() => 0),
    }));
    const trace: number[] = [];
    for (let epoch = 0; epoch < opts.epochs; epoch++) {
      const grads = this.layers.map((l) => ({
        W: l.W.map((row) => row.map(() => 0)),
        b: l.b.map(() => 0),
      }));
      let lossSum = 0;
      for (let s = 0; s < inputs.length; s++) {
        // forward pass keeping every layer's input and pre-activation
        const acts: number[][] = [inputs[s]];
        const pres: number[][] = [];
        let v = inputs[s];
        for (const layer of this.layers) {
          const pre = layer.W.map(
            (row, i) =>
              row.reduce((acc, w, j) => acc + w * v[j], 0) + layer.b[i],
          );
          pres.push(pre);
          v = layer.activation === "relu" ? pre.map((z) => Math.max(0, z)) : pre;
          acts.push(v);
        }
        const y = acts[acts.length - 1];
        let delta = y.map((yk, k) => {
          const e = yk - targets[s][k];
          lossSum += e * e;
          return (2 * e) / inputs.length;
        });
        for (let li = this.layers.length - 1; li >= 0; li--) {
          const layer = this.layers[li];
          if (layer.activation === "relu") {
            delta = delta.map((d, i) => (pres[li][i] > 0 ? d : 0));
          }
          const below = acts[li];
          for (let i = 0; i < layer.W.length; i++) {
            grads[li].b[i] += delta[i];
            for (let j = 0; j < below.length; j++) {
              grads[li].W[i][j] += delta[i] * below[j];
            }
          }
          if (li > 0) {
            delta = below.map((_, j) =>
              layer.W.reduce((acc, row, i) => acc + row[j] * delta[i], 0),
            );
          }
        }
      }
      for (let li = 0; li < this.layers.length; li++) {
        const layer = this.layers[li];
        for (let i = 0; i < layer.W.length; i++) {
          vel[li].b[i] =
            opts.momentum * vel[li].b[i] - opts.learningRate * grads[li].b[i];
          layer.b[i] += vel[li].b[i];
          for (let j = 0; j < layer.W[i].length; j++) {
            vel[li].W[i][j] =
              opts.momentum * vel[li].W[i][j] -
              opts.learningRate * grads[li].W[i][j];
            layer.W[i][j] += vel[li].W[i][j];
          }
        }
      }
      const loss = lossSum / inputs.length;
      trace.push(loss);
      if (!Number.isFinite(loss)) {
        return { lossTrace: trace, diverged: true };
      }
      if (opts.verbose && epoch % 100 === 0) {
        console.log(`epoch ${epoch}: loss ${loss.toExponential(4)}`);
      }
    }
    return { lossTrace: trace, diverged: false };
  }

  toData(): NetworkData {
    return {
      layers: this.layers.map((l) => ({
        W: l.W.map((row) => row.slice()),
        b: l.b.slice(),
        activation: l.activation,
      })),
    };
  }
}
