import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { inflateSync } from "node:zlib";

const HERE = dirname(fileURLToPath(import.meta.url));
export const GOLDEN = join(HERE, "..", "..", "tests", "golden");

export function loadFixture(name: string): ArrayBuffer {
  const buf = readFileSync(join(GOLDEN, name));
  return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

export interface Png {
  width: number;
  height: number;
  rgb: Uint8Array; // width * height * 3
}

/** Minimal decoder for 8-bit RGB non-interlaced PNG (the golden renders). */
export function decodePng(path: string): Png {
  const data = readFileSync(path);
  if (!data.subarray(1, 4).equals(Buffer.from("PNG"))) {
    throw new Error("not a PNG");
  }
  let off = 8;
  let width = 0;
  let height = 0;
  let colorType = -1;
  const idat: Buffer[] = [];
  while (off < data.length) {
    const len = data.readUInt32BE(off);
    const type = data.toString("ascii", off + 4, off + 8);
    const body = data.subarray(off + 8, off + 8 + len);
    if (type === "IHDR") {
      width = body.readUInt32BE(0);
      height = body.readUInt32BE(4);
      const bitDepth = body[8];
      colorType = body[9];
      if (bitDepth !== 8 || colorType !== 2 || body[12] !== 0) {
        throw new Error("decoder only supports 8-bit RGB non-interlaced");
      }
    } else if (type === "IDAT") {
      idat.push(body);
    }
    off += 12 + len;
  }
  const raw = inflateSync(Buffer.concat(idat));
  const bpp = 3;
  const rowBytes = width * bpp;
  const rgb = new Uint8Array(width * height * bpp);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (rowBytes + 1)];
    const row = raw.subarray(y * (rowBytes + 1) + 1, (y + 1) * (rowBytes + 1));
    const out = rgb.subarray(y * rowBytes, (y + 1) * rowBytes);
    const prev = y > 0 ? rgb.subarray((y - 1) * rowBytes, y * rowBytes) : null;
    for (let i = 0; i < rowBytes; i++) {
      const a = i >= bpp ? out[i - bpp] : 0;
      const b = prev ? prev[i] : 0;
      const c = i >= bpp && prev ? prev[i - bpp] : 0;
      let v = row[i];
      if (filter === 1) v += a;
      else if (filter === 2) v += b;
      else if (filter === 3) v += (a + b) >> 1;
      else if (filter === 4) {
        const p = a + b - c;
        const pa = Math.abs(p - a);
        const pb = Math.abs(p - b);
        const pc = Math.abs(p - c);
        v += pa <= pb && pa <= pc ? a : pb <= pc ? b : c;
      } else if (filter !== 0) {
        throw new Error(`unknown PNG filter ${filter}`);
      }
      out[i] = v & 0xff;
    }
  }
  return { width, height, rgb };
}

/** PSNR in dB between a float [0,1] RGB buffer and u8 RGB, both row-major. */
export function psnrVsU8(frame: Float32Array, rgb: Uint8Array): number {
  if (frame.length !== rgb.length) throw new Error("size mismatch");
  let sum = 0;
  for (let i = 0; i < frame.length; i++) {
    const d = frame[i] - rgb[i] / 255;
    sum += d * d;
  }
  const mse = sum / frame.length;
  return mse === 0 ? Infinity : 10 * Math.log10(1 / mse);
}
