/**
 * CPU-side scene preparation: back-projected quads, global draw order, and
 * the per-tile overlap-blend modulation that mirrors the software renderer.
 */

import { CameraModel, TmpiFile } from "./format.js";

const RAMP_EPS = 1e-3;

export interface Quad {
  tileIndex: number;
  planeIndex: number;
  depth: number;
  /** 4 corners * xyz in the source camera frame:
   *  (x, y), (x+h, y), (x, y+h), (x+h, y+h) back-projected to the plane. */
  vertices: Float64Array;
  /** tileSize^2 RGBA, modulation baked into alpha. */
  rgba: Uint8Array;
}

export interface GpuTmpi {
  file: TmpiFile;
  quads: Quad[];
  /** Indices into quads, back-to-front (depth non-increasing). */
  drawOrder: number[];
  medianDepth: number;
}

function backProject(u: number, v: number, depth: number, cam: CameraModel): number[] {
  return [(depth * (u - cam.cx)) / cam.fx, (depth * (v - cam.cy)) / cam.fy, depth];
}

/** Separable linear edge ramp over the h - r overlap band (1 in the interior). */
export function blendRamp(h: number, r: number): Float64Array {
  const band = h - r;
  const w = new Float64Array(h).fill(1);
  for (let i = 0; i < band; i++) {
    const v = RAMP_EPS + ((1 - RAMP_EPS) * i) / band;
    w[i] = v;
    w[h - 1 - i] = v;
  }
  const out = new Float64Array(h * h);
  for (let y = 0; y < h; y++) for (let x = 0; x < h; x++) out[y * h + x] = w[y] * w[x];
  return out;
}

/**
 * Per-tile alpha modulation: tiles are visited in file (row-major) order and
 * each tile's ramp is normalized by the running per-pixel weight sum, so the
 * first tile covering a pixel keeps modulation exactly 1. Identical to the
 * software renderer's overlap blending.
 */
export function tileModulations(file: TmpiFile): Float64Array[] {
  const h = file.tileSize;
  const ramp = blendRamp(h, file.stride);
  const sum = new Float64Array(file.imageWidth * file.imageHeight);
  const mods: Float64Array[] = [];
  for (const tile of file.tiles) {
    const mod = new Float64Array(h * h);
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < h; x++) {
        const r = ramp[y * h + x];
        const s = sum[(tile.y + y) * file.imageWidth + (tile.x + x)];
        mod[y * h + x] = r / (s + r);
        sum[(tile.y + y) * file.imageWidth + (tile.x + x)] = s + r;
      }
    }
    mods.push(mod);
  }
  return mods;
}

export function buildGpuTmpi(file: TmpiFile): GpuTmpi {
  const h = file.tileSize;
  const mods = tileModulations(file);
  const quads: Quad[] = [];
  const depths: number[] = [];
  file.tiles.forEach((tile, tileIndex) => {
    tile.planes.forEach((plane, planeIndex) => {
      const d = plane.depth;
      const cam = file.camera;
      const vertices = new Float64Array([
        ...backProject(tile.x, tile.y, d, cam),
        ...backProject(tile.x + h, tile.y, d, cam),
        ...backProject(tile.x, tile.y + h, d, cam),
        ...backProject(tile.x + h, tile.y + h, d, cam),
      ]);
      const rgba = new Uint8Array(plane.rgba);
      const mod = mods[tileIndex];
      for (let i = 0; i < h * h; i++) {
        rgba[4 * i + 3] = Math.round(rgba[4 * i + 3] * mod[i]);
      }
      quads.push({ tileIndex, planeIndex, depth: d, vertices, rgba });
      depths.push(d);
    });
  });
  const drawOrder = quads
    .map((_, i) => i)
    .sort((a, b) => {
      if (quads[a].depth !== quads[b].depth) return quads[b].depth - quads[a].depth;
      if (quads[a].tileIndex !== quads[b].tileIndex)
        return quads[a].tileIndex - quads[b].tileIndex;
      return quads[a].planeIndex - quads[b].planeIndex;
    });
  depths.sort((a, b) => a - b);
  const medianDepth = depths.length
    ? depths[Math.floor(depths.length / 2)]
    : 1;
  return { file, quads, drawOrder, medianDepth };
}

export function checkDrawOrder(gpu: GpuTmpi): boolean {
  for (let i = 1; i < gpu.drawOrder.length; i++) {
    if (gpu.quads[gpu.drawOrder[i]].depth > gpu.quads[gpu.drawOrder[i - 1]].depth) {
      return false;
    }
  }
  return true;
}
