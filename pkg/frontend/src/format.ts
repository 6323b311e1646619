/**
 * Binary TMPI container parser (little-endian).
 *
 * Layout:
 *   magic   4 bytes  "TMPI"
 *   version u16      currently 1
 *   header  6 x u32  imageWidth, imageHeight, tileSize, stride,
 *                    maxPlanes, tileCount
 *   camera  16 x f64 fx, fy, cx, cy, rotation row-major (9), translation (3)
 *   tiles   per tile: x u32, y u32, planeCount u16,
 *           planeCount f32 depths (strictly increasing),
 *           planeCount * tileSize^2 RGBA u8 (non-premultiplied)
 */

export class TmpiFormatError extends Error {}
export class BadMagicError extends TmpiFormatError {}
export class VersionError extends TmpiFormatError {}
export class TruncatedFileError extends TmpiFormatError {}
export class InvariantError extends TmpiFormatError {}

export const TMPI_MAGIC = "TMPI";
export const TMPI_VERSION = 1;

const HEADER_SIZE = 4 + 2 + 6 * 4 + 16 * 8;
const TILE_HEAD_SIZE = 4 + 4 + 2;

export interface CameraModel {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  rotation: Float64Array; // 9, row-major
  translation: Float64Array; // 3
}

export interface PlaneData {
  depth: number;
  /** tileSize * tileSize * 4 bytes, row-major RGBA, non-premultiplied. */
  rgba: Uint8Array;
}

export interface TileData {
  x: number;
  y: number;
  planes: PlaneData[];
}

export interface TmpiFile {
  imageWidth: number;
  imageHeight: number;
  tileSize: number;
  stride: number;
  maxPlanes: number;
  camera: CameraModel;
  tiles: TileData[];
}

function isOrthonormal(r: Float64Array, tol = 1e-6): boolean {
  // R R^T = I and det(R) = +1
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let dot = 0;
      for (let k = 0; k < 3; k++) dot += r[3 * i + k] * r[3 * j + k];
      if (Math.abs(dot - (i === j ? 1 : 0)) > tol) return false;
    }
  }
  const det =
    r[0] * (r[4] * r[8] - r[5] * r[7]) -
    r[1] * (r[3] * r[8] - r[5] * r[6]) +
    r[2] * (r[3] * r[7] - r[4] * r[6]);
  return Math.abs(det - 1) <= tol;
}

export function parseTmpi(buffer: ArrayBuffer): TmpiFile {
  const bytes = new Uint8Array(buffer);
  const magic = String.fromCharCode(...bytes.slice(0, Math.min(4, bytes.length)));
  if (bytes.length < 4 || magic !== TMPI_MAGIC) {
    throw new BadMagicError(`bad magic ${JSON.stringify(magic)}, expected "TMPI"`);
  }
  if (bytes.length < HEADER_SIZE) {
    throw new TruncatedFileError("file ends inside the header");
  }
  const view = new DataView(buffer);
  const version = view.getUint16(4, true);
  if (version !== TMPI_VERSION) {
    throw new VersionError(`unsupported version ${version}`);
  }
  const imageWidth = view.getUint32(6, true);
  const imageHeight = view.getUint32(10, true);
  const tileSize = view.getUint32(14, true);
  const stride = view.getUint32(18, true);
  const maxPlanes = view.getUint32(22, true);
  const tileCount = view.getUint32(26, true);

  const cam = new Float64Array(16);
  for (let i = 0; i < 16; i++) cam[i] = view.getFloat64(30 + 8 * i, true);
  const rotation = cam.slice(4, 13);
  if (!isOrthonormal(rotation)) {
    throw new InvariantError("invalid source camera: rotation is not orthonormal");
  }
  const camera: CameraModel = {
    fx: cam[0],
    fy: cam[1],
    cx: cam[2],
    cy: cam[3],
    rotation,
    translation: cam.slice(13, 16),
  };
  if (camera.fx <= 0 || camera.fy <= 0) {
    throw new InvariantError("invalid source camera: focal lengths must be positive");
  }

  const planeBytes = tileSize * tileSize * 4;
  let offset = HEADER_SIZE;
  const tiles: TileData[] = [];
  for (let t = 0; t < tileCount; t++) {
    if (offset + TILE_HEAD_SIZE > bytes.length) {
      throw new TruncatedFileError(`file ends inside tile ${t} header`);
    }
    const x = view.getUint32(offset, true);
    const y = view.getUint32(offset + 4, true);
    const k = view.getUint16(offset + 8, true);
    offset += TILE_HEAD_SIZE;
    if (k > maxPlanes) {
      throw new InvariantError(`tile ${t} has ${k} planes, max is ${maxPlanes}`);
    }
    if (offset + 4 * k + planeBytes * k > bytes.length) {
      throw new TruncatedFileError(`file ends inside tile ${t} payload`);
    }
    const planes: PlaneData[] = [];
    let prevDepth = 0;
    for (let p = 0; p < k; p++) {
      const depth = view.getFloat32(offset + 4 * p, true);
      if (depth <= prevDepth) {
        throw new InvariantError(`tile ${t} depths not strictly increasing`);
      }
      prevDepth = depth;
      planes.push({ depth, rgba: new Uint8Array(0) });
    }
    offset += 4 * k;
    for (let p = 0; p < k; p++) {
      planes[p].rgba = bytes.slice(offset, offset + planeBytes);
      offset += planeBytes;
    }
    tiles.push({ x, y, planes });
  }
  if (offset !== bytes.length) {
    throw new InvariantError(`${bytes.length - offset} trailing bytes after last tile`);
  }
  return { imageWidth, imageHeight, tileSize, stride, maxPlanes, camera, tiles };
}

export function planeCount(file: TmpiFile): number {
  return file.tiles.reduce((acc, t) => acc + t.planes.length, 0);
}

export function textureBytes(file: TmpiFile): number {
  return planeCount(file) * file.tileSize * file.tileSize * 4;
}
