/**
 * CPU reference compositor, mirroring the software renderer: per-plane
 * homography warp (tile-shifted intrinsics) plus global back-to-front over
 * compositing. Used by the test suite and as a no-WebGL fallback; the GPU
 * path draws the same quads and must agree with this up to filtering.
 */

import { TmpiFile } from "./format.js";
import { GpuTmpi, tileModulations } from "./geometry.js";

export interface ViewOffset {
  x: number;
  y: number;
  z: number;
}

type Mat3 = Float64Array; // row-major 9

function mat3Mul(a: Mat3, b: Mat3): Mat3 {
  const o = new Float64Array(9);
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++) {
      let s = 0;
      for (let k = 0; k < 3; k++) s += a[3 * i + k] * b[3 * k + j];
      o[3 * i + j] = s;
    }
  return o;
}

function mat3Inv(m: Mat3): Mat3 {
  const [a, b, c, d, e, f, g, h, i] = m;
  const A = e * i - f * h;
  const B = c * h - b * i;
  const C = b * f - c * e;
  const det = a * A + d * B + g * C;
  if (Math.abs(det) < 1e-300) throw new Error("singular matrix");
  return new Float64Array([
    A / det, B / det, C / det,
    (f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det,
    (d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det,
  ]);
}

/** Homography from tile space on the plane z=depth to target pixels, for a
 *  target camera whose world position is offset by `off` from the source. */
function planeHomography(
  file: TmpiFile,
  tileX: number,
  tileY: number,
  depth: number,
  off: ViewOffset,
): Mat3 {
  const cam = file.camera;
  const R = cam.rotation;
  // camera position moves by +off: world-to-camera t_rel = -R * off
  const tRel = [
    -(R[0] * off.x + R[1] * off.y + R[2] * off.z),
    -(R[3] * off.x + R[4] * off.y + R[5] * off.z),
    -(R[6] * off.x + R[7] * off.y + R[8] * off.z),
  ];
  // A = I + t_rel n^T / depth with n = (0, 0, 1)
  const A = new Float64Array([
    1, 0, tRel[0] / depth,
    0, 1, tRel[1] / depth,
    0, 0, 1 + tRel[2] / depth,
  ]);
  const K = new Float64Array([cam.fx, 0, cam.cx, 0, cam.fy, cam.cy, 0, 0, 1]);
  const KsInv = new Float64Array([
    1 / cam.fx, 0, -(cam.cx - tileX) / cam.fx,
    0, 1 / cam.fy, -(cam.cy - tileY) / cam.fy,
    0, 0, 1,
  ]);
  return mat3Mul(K, mat3Mul(A, KsInv));
}

/** Render the scene at a camera offset; returns RGB float rows, [0, 1]. */
export function renderView(gpu: GpuTmpi, off: ViewOffset): Float32Array {
  const file = gpu.file;
  const W = file.imageWidth;
  const H = file.imageHeight;
  const h = file.tileSize;
  const mods = tileModulations(file);
  const out = new Float64Array(W * H * 3);

  for (const qi of gpu.drawOrder) {
    const quad = gpu.quads[qi];
    const tile = file.tiles[quad.tileIndex];
    const plane = tile.planes[quad.planeIndex];
    const mod = mods[quad.tileIndex];
    const Hinv = mat3Inv(planeHomography(file, tile.x, tile.y, quad.depth, off));
    const rgba = plane.rgba;
    for (let py = 0; py < H; py++) {
      for (let px = 0; px < W; px++) {
        const sw = Hinv[6] * px + Hinv[7] * py + Hinv[8];
        if (sw <= 1e-12) continue;
        const sx = (Hinv[0] * px + Hinv[1] * py + Hinv[2]) / sw;
        const sy = (Hinv[3] * px + Hinv[4] * py + Hinv[5]) / sw;
        if (sx <= -1 || sx >= h || sy <= -1 || sy >= h) continue;
        const x0 = Math.floor(sx);
        const y0 = Math.floor(sy);
        const fx = sx - x0;
        const fy = sy - y0;
        let r = 0;
        let g = 0;
        let b = 0;
        let a = 0;
        for (let dy = 0; dy <= 1; dy++) {
          const yy = y0 + dy;
          if (yy < 0 || yy >= h) continue;
          for (let dx = 0; dx <= 1; dx++) {
            const xx = x0 + dx;
            if (xx < 0 || xx >= h) continue;
            const wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
            const base = 4 * (yy * h + xx);
            const am = (rgba[base + 3] / 255) * mod[yy * h + xx];
            r += wgt * (rgba[base] / 255);
            g += wgt * (rgba[base + 1] / 255);
            b += wgt * (rgba[base + 2] / 255);
            a += wgt * am;
          }
        }
        const o = 3 * (py * W + px);
        out[o] = a * r + (1 - a) * out[o];
        out[o + 1] = a * g + (1 - a) * out[o + 1];
        out[o + 2] = a * b + (1 - a) * out[o + 2];
      }
    }
  }
  const clipped = new Float32Array(out.length);
  for (let i = 0; i < out.length; i++) clipped[i] = Math.min(1, Math.max(0, out[i]));
  return clipped;
}
