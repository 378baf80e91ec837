/** Training targets for the toy example networks.
 *
 * SinCosSurface: cos(x1) + sin(x2) sampled on a 20 x 20 grid of [-5, 5]^2
 * (400 points). ToyPolicy: a hand-coded saturating state feedback for the
 * double integrator, sampled on a grid of the operating box.
 */

export interface Dataset {
  inputs: number[][];
  targets: number[][];
}

export type TargetName = "sincos" | "policy";

function clip(z: number, limit: number): number {
  return Math.min(limit, Math.max(-limit, z));
}

export function sinCosDataset(side = 20, radius = 5): Dataset {
  const inputs: number[][] = [];
  const targets: number[][] = [];
  for (let i = 0; i < side; i++) {
    for (let j = 0; j < side; j++) {
      const x1 = -radius + (2 * radius * i) / (side - 1);
      const x2 = -radius + (2 * radius * j) / (side - 1);
      inputs.push([x1, x2]);
      targets.push([Math.cos(x1) + Math.sin(x2)]);
    }
  }
  return { inputs, targets };
}

/** u = clip(-1.2 (x2 + clip(0.5 x1, -1.5, 1.5)), -1, 1). */
export function policyTarget(x1: number, x2: number): number {
  return clip(-1.2 * (x2 + clip(0.5 * x1, 1.5)), 1.0);
}

export function policyDataset(side = 21): Dataset {
  const inputs: number[][] = [];
  const targets: number[][] = [];
  for (let i = 0; i < side; i++) {
    for (let j = 0; j < side; j++) {
      const x1 = -4 + (8 * i) / (side - 1);
      const x2 = -2 + (4 * j) / (side - 1);
      inputs.push([x1, x2]);
      targets.push([policyTarget(x1, x2)]);
    }
  }
  return { inputs, targets };
}

export function datasetFor(name: TargetName): Dataset {
  if (name === "sincos") return sinCosDataset();
  if (name === "policy") return policyDataset();
  throw new Error(`unknown target ${name}`);
}

export function defaultLayers(name: TargetName): number[] {
  return name === "sincos" ? [2, 20, 10, 10, 1] : [2, 8, 4, 1];
}
