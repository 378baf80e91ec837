/** Render an exported surface file to a standalone SVG.
 *
 * The input is the JSON the verifier's `plot` command writes: a list of
 * convex leaf polygons, each tagged with its binary assignment. Each leaf
 * becomes one filled `<path>` (or a polyline when the leaf is degenerate,
 * i.e. a segment or a point), colored by a stable hash of the assignment so
 * the same activation pattern always gets the same hue.
 */
import * as fs from "node:fs";

export interface SurfaceLeaf {
  binary: number[];
  vertices: number[][];
  degenerate: boolean;
}

export interface SurfaceData {
  dims: number[];
  complete: boolean;
  leaves: SurfaceLeaf[];
}

export interface RenderOptions {
  width: number;
  height: number;
  margin: number;
  style: "fill" | "wire";
}

export const defaultRenderOptions: RenderOptions = {
  width: 640,
  height: 480,
  margin: 40,
  style: "fill",
};

export function readSurface(path: string): SurfaceData {
  const d = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!Array.isArray(d.leaves)) {
    throw new Error("surface file has no leaves array");
  }
  return {
    dims: d.dims ?? [],
    complete: d.complete ?? true,
    leaves: d.leaves.map((e: SurfaceLeaf) => ({
      binary: e.binary,
      vertices: e.vertices,
      degenerate: Boolean(e.degenerate),
    })),
  };
}

/** Stable color for an assignment: hash the pattern into a hue. */
export function leafColor(binary: number[]): string {
  let h = 2166136261;
  for (const v of binary) {
    h = Math.imul(h ^ (v & 0xff), 16777619);
  }
  const hue = ((h >>> 0) % 360 + 360) % 360;
  return `hsl(${hue}, 65%, 60%)`;
}

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

export function renderSurface(
  surface: SurfaceData,
  opts: RenderOptions = defaultRenderOptions,
): string {
  const { width, height, margin, style } = opts;
  // Projected x/y are the first two coordinates of every vertex row.
  const pts = surface.leaves.flatMap((l) => l.vertices);
  let lines: string[] = [];
  lines.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  lines.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  const axes =
    `<rect x="${margin}" y="${margin}" width="${width - 2 * margin}" ` +
    `height="${height - 2 * margin}" fill="none" stroke="#333"/>`;
  if (pts.length === 0) {
    // Nothing to draw (empty set) -- emit blank axes rather than failing.
    lines.push(axes);
    lines.push("</svg>");
    return lines.join("\n") + "\n";
  }
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const p of pts) {
    xMin = Math.min(xMin, p[0]);
    xMax = Math.max(xMax, p[0]);
    yMin = Math.min(yMin, p[1]);
    yMax = Math.max(yMax, p[1]);
  }
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const sx = (x: number) => margin + ((x - xMin) / xSpan) * (width - 2 * margin);
  const sy = (y: number) =>
    height - margin - ((y - yMin) / ySpan) * (height - 2 * margin);

  for (const leaf of surface.leaves) {
    const color = leafColor(leaf.binary);
    const d = leaf.vertices
      .map(
        (p, i) => `${i === 0 ? "M" : "L"}${fmt(sx(p[0]))},${fmt(sy(p[1]))}`,
      )
      .join(" ");
    const tag = leaf.binary.join(",");
    const data = leaf.vertices
      .map((p) => p.map((v) => fmt(v)).join(","))
      .join(" ");
    if (leaf.degenerate || leaf.vertices.length < 3) {
      if (leaf.vertices.length === 1) {
        const p = leaf.vertices[0];
        lines.push(
          `<circle class="leaf" data-binary="${tag}" data-vertices="${data}" ` +
            `cx="${fmt(sx(p[0]))}" cy="${fmt(sy(p[1]))}" r="3" ` +
            `fill="${color}"/>`,
        );
      } else {
        lines.push(
          `<path class="leaf" data-binary="${tag}" data-vertices="${data}" ` +
            `d="${d}" fill="none" stroke="${color}" stroke-width="2"/>`,
        );
      }
    } else if (style === "wire") {
      lines.push(
        `<path class="leaf" data-binary="${tag}" data-vertices="${data}" ` +
          `d="${d} Z" fill="none" stroke="${color}" stroke-width="1.5"/>`,
      );
    } else {
      lines.push(
        `<path class="leaf" data-binary="${tag}" data-vertices="${data}" ` +
          `d="${d} Z" fill="${color}" fill-opacity="0.7" stroke="#333" ` +
          `stroke-width="0.5"/>`,
      );
    }
  }
  lines.push(axes);
  lines.push("</svg>");
  return lines.join("\n") + "\n";
}

export function renderSurfaceFile(
  inPath: string,
  outPath: string,
  opts: RenderOptions = defaultRenderOptions,
): number {
  const surface = readSurface(inPath);
  fs.writeFileSync(outPath, renderSurface(surface, opts));
  return surface.leaves.length;
}
