/** Read/write networks in the verifier's interchange format.
 *
 * JSON.stringify emits the shortest decimal that round-trips every IEEE
 * double, so re-parsing (here or in the verifier) recovers the matrices
 * bit for bit.
 */
import * as fs from "node:fs";

import type { LayerData, NetworkData } from "./mlp.js";

export function validateNetwork(data: NetworkData): void {
  if (!Array.isArray(data.layers) || data.layers.length === 0) {
    throw new Error("network must have at least one layer");
  }
  data.layers.forEach((layer, i) => {
    if (!Array.isArray(layer.W) || !Array.isArray(layer.b)) {
      throw new Error(`layers[${i}]: W and b must be arrays`);
    }
    if (layer.W.length !== layer.b.length) {
      throw new Error(
        `layers[${i}]: W has ${layer.W.length} rows, b has ${layer.b.length}`,
      );
    }
    const cols = layer.W[0]?.length ?? 0;
    layer.W.forEach((row, r) => {
      if (row.length !== cols) {
        throw new Error(`layers[${i}].W[${r}]: ragged row`);
      }
    });
    if (i > 0 && cols !== data.layers[i - 1].W.length) {
      throw new Error(
        `layers[${i}].W: expected ${data.layers[i - 1].W.length} columns ` +
          `to chain with layers[${i - 1}], got ${cols}`,
      );
    }
    const want = i + 1 < data.layers.length ? "relu" : "none";
    if (layer.activation !== want) {
      throw new Error(`layers[${i}].activation: expected '${want}'`);
    }
  });
}

export function writeNetwork(data: NetworkData, path: string): void {
  validateNetwork(data);
  fs.writeFileSync(path, JSON.stringify(data, null, 1) + "\n");
}

export function readNetwork(path: string): NetworkData {
  const data = JSON.parse(fs.readFileSync(path, "utf-8")) as NetworkData;
  validateNetwork(data);
  return data;
}

export function networksEqual(a: NetworkData, b: NetworkData): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Scale the output layer so |f| never exceeds `limit` on the given inputs. */
export function capOutput(
  data: NetworkData,
  evaluate: (x: number[]) => number[],
  inputs: number[][],
  limit: number,
): NetworkData {
  let peak = 0;
  for (const x of inputs) {
    for (const y of evaluate(x)) {
      peak = Math.max(peak, Math.abs(y));
    }
  }
  if (peak <= limit) {
    return data;
  }
  const factor = limit / peak;
  const last = data.layers[data.layers.length - 1];
  const scaled: LayerData = {
    W: last.W.map((row) => row.map((w) => w * factor)),
    b: last.b.map((v) => v * factor),
    activation: last.activation,
  };
  return { layers: [...data.layers.slice(0, -1), scaled] };
}
