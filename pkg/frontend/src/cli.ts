/** Command-line entry point.
 *
 *   train  --target sincos|policy [--layers 2,20,10,10,1] [--epochs N]
 *          [--seed S] [--lr R] [--momentum M] --out net.json
 *   render surface.json --out out.svg [--style fill|wire]
 *
 * `train` fits a small MLP to one of the built-in targets and writes it in
 * the verifier's network format. The policy target is additionally capped so
 * |f(x)| <= 1 on the training grid (the actuator range the reachability
 * examples assume). `render` turns an exported surface file into an SVG.
 */
import { pathToFileURL } from "node:url";

import { Mlp } from "./mlp.js";
import { capOutput, writeNetwork } from "./network-io.js";
import { defaultRenderOptions, renderSurfaceFile } from "./render.js";
import { datasetFor, defaultLayers, type TargetName } from "./targets.js";

interface Args {
  positional: string[];
  flags: Map<string, string>;
}

function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a.startsWith("--")) {
      const value = argv[i + 1];
      if (value === undefined) {
        throw new Error(`flag ${a} needs a value`);
      }
      flags.set(a.slice(2), value);
      i++;
    } else {
      positional.push(a);
    }
  }
  return { positional, flags };
}

export function runTrain(args: Args): number {
  const target = (args.flags.get("target") ?? "sincos") as TargetName;
  if (target !== "sincos" && target !== "policy") {
    console.error(`unknown target: ${target}`);
    return 2;
  }
  const out = args.flags.get("out");
  if (!out) {
    console.error("train needs --out <net.json>");
    return 2;
  }
  const layers = args.flags.has("layers")
    ? args.flags.get("layers")!.split(",").map(Number)
    : defaultLayers(target);
  if (layers.some((n) => !Number.isInteger(n) || n < 1)) {
    console.error("--layers must be a comma list of positive integers");
    return 2;
  }
  const epochs = Number(args.flags.get("epochs") ?? 2000);
  const seed = Number(args.flags.get("seed") ?? 1);
  const lr = Number(args.flags.get("lr") ?? 0.02);
  const momentum = Number(args.flags.get("momentum") ?? 0.9);

  console.log(
    `train target=${target} layers=${layers.join(",")} epochs=${epochs} ` +
      `seed=${seed} lr=${lr} momentum=${momentum}`,
  );
  const data = datasetFor(target);
  const net = new Mlp(layers, seed);
  const result = net.train(data.inputs, data.targets, {
    epochs,
    learningRate: lr,
    momentum,
    verbose: true,
  });
  if (result.diverged) {
    const tail = result.lossTrace.slice(-5).map((v) => v.toExponential(3));
    console.error(
      `training diverged after ${result.lossTrace.length} epochs ` +
        `(last losses: ${tail.join(" ")}); lower --lr and retry`,
    );
    return 1;
  }
  const finalLoss = result.lossTrace[result.lossTrace.length - 1];
  if (finalLoss !== undefined) {
    console.log(`final loss ${finalLoss.toExponential(4)}`);
  }
  let exported = net.toData();
  if (target === "policy") {
    exported = capOutput(
      exported,
      (x) => net.forward(x),
      data.inputs,
      1.0,
    );
  }
  writeNetwork(exported, out);
  console.log(`wrote ${out}`);
  return 0;
}

export function runRender(args: Args): number {
  const input = args.positional[0];
  if (!input) {
    console.error("render needs a surface file argument");
    return 2;
  }
  const out = args.flags.get("out") ?? input.replace(/\.json$/, "") + ".svg";
  const style = args.flags.get("style") ?? "fill";
  if (style !== "fill" && style !== "wire") {
    console.error(`unknown style: ${style}`);
    return 2;
  }
  const n = renderSurfaceFile(input, out, { ...defaultRenderOptions, style });
  console.log(`wrote ${out} (${n} leaves)`);
  return 0;
}

export function main(argv: string[]): number {
  const [cmd, ...rest] = argv;
  try {
    if (cmd === "train") return runTrain(parseArgs(rest));
    if (cmd === "render") return runRender(parseArgs(rest));
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
  console.error("usage: cli.js train|render ...");
  return 2;
}

const invoked = process.argv[1];
if (invoked && import.meta.url === pathToFileURL(invoked).href) {
  process.exit(main(process.argv.slice(2)));
}
