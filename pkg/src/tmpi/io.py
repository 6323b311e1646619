"""File formats: the TMPI binary container, raster I/O, and camera paths.

TMPI container layout (all little-endian):

    magic   4 bytes  b"TMPI"
    version u16      currently 1
    header  6 x u32  image_width, image_height, tile_size, stride,
                     max planes per tile, tile count
    camera  16 x f64 fx, fy, cx, cy, rotation row-major (9), translation (3)
    tiles   per tile: origin x (u32), origin y (u32), plane count k (u16),
            k plane depths (f32), k planes of h*h RGBA bytes
            (u8, row-major, non-premultiplied)
"""

from __future__ import annotations

import logging
import os
import struct
import tempfile

import numpy as np
from PIL import Image as PilImage
from scipy.ndimage import distance_transform_edt

from .core import Camera, DepthMap, Image
from .mpigen import RgbaPlane, TileMpi, TiledMpi
from .tiling import TileGrid

__all__ = [
    "TMPI_MAGIC",
    "TMPI_VERSION",
    "TmpiFormatError",
    "BadMagicError",
    "VersionError",
    "TruncatedFileError",
    "InvariantError",
    "write_tmpi",
    "read_tmpi",
    "tmpi_bytes",
    "parse_tmpi_bytes",
    "load_image",
    "save_image",
    "load_depth",
    "fill_depth_holes",
    "load_camera_path",
    "save_camera_path",
]

log = logging.getLogger(__name__)

TMPI_MAGIC = b"TMPI"
TMPI_VERSION = 1

_HEADER = struct.Struct("<4sH6I16d")
_TILE_HEAD = struct.Struct("<IIH")


class TmpiFormatError(ValueError):
    """Base class for TMPI container errors."""


class BadMagicError(TmpiFormatError):
    pass


class VersionError(TmpiFormatError):
    pass


class TruncatedFileError(TmpiFormatError):
    pass


class InvariantError(TmpiFormatError):
    pass


def tmpi_bytes(tmpi: TiledMpi) -> bytes:
    """Serialize a tiled MPI to the binary container format."""
    grid = tmpi.grid
    cam = tmpi.source_camera
    cam_vals = [cam.fx, cam.fy, cam.cx, cam.cy,
                *cam.rotation.ravel(), *cam.translation]
    parts = [_HEADER.pack(TMPI_MAGIC, TMPI_VERSION,
                          grid.image_width, grid.image_height,
                          grid.tile_size, grid.stride, tmpi.n,
                          grid.num_tiles, *cam_vals)]
    for tile in tmpi.tiles:
        x, y = tile.origin
        parts.append(_TILE_HEAD.pack(int(x), int(y), len(tile.planes)))
        depths = np.array([p.depth for p in tile.planes], dtype="<f4")
        parts.append(depths.tobytes())
        for p in tile.planes:
            rgba = np.dstack([p.color, p.alpha])
            parts.append((np.round(rgba * 255.0)).astype(np.uint8).tobytes())
    return b"".join(parts)


def write_tmpi(tmpi: TiledMpi, path) -> None:
    """Atomically write the TMPI container (temp file + rename)."""
    payload = tmpi_bytes(tmpi)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmpi.part")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_tmpi_bytes(data: bytes) -> TiledMpi:
    """Parse and validate a TMPI container."""
    if len(data) < 4 or data[:4] != TMPI_MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {TMPI_MAGIC!r}")
    if len(data) < _HEADER.size:
        raise TruncatedFileError("file ends inside the header")
    (_, version, width, height, h, r, n_max, m, *cam_vals) = _HEADER.unpack_from(data)
    if version != TMPI_VERSION:
        raise VersionError(f"unsupported version {version}")
    try:
        camera = Camera(fx=cam_vals[0], fy=cam_vals[1], cx=cam_vals[2], cy=cam_vals[3],
                        rotation=np.array(cam_vals[4:13]).reshape(3, 3),
                        translation=np.array(cam_vals[13:16]))
    except ValueError as e:
        raise InvariantError(f"invalid source camera: {e}") from e

    offset = _HEADER.size
    origins = []
    tiles = []
    plane_bytes = h * h * 4
    for t_idx in range(m):
        if offset + _TILE_HEAD.size > len(data):
            raise TruncatedFileError(f"file ends inside tile {t_idx} header")
        x, y, k = _TILE_HEAD.unpack_from(data, offset)
        offset += _TILE_HEAD.size
        if k > n_max:
            raise InvariantError(f"tile {t_idx} has {k} planes, max is {n_max}")
        need = 4 * k + plane_bytes * k
        if offset + need > len(data):
            raise TruncatedFileError(f"file ends inside tile {t_idx} payload")
        depths = np.frombuffer(data, dtype="<f4", count=k, offset=offset)
        offset += 4 * k
        if np.any(np.diff(depths) <= 0) or np.any(depths <= 0):
            raise InvariantError(f"tile {t_idx} depths not strictly increasing")
        planes = []
        for depth in depths:
            raw = np.frombuffer(data, dtype=np.uint8, count=plane_bytes,
                                offset=offset).reshape(h, h, 4)
            offset += plane_bytes
            rgba = raw.astype(np.float32) / 255.0
            planes.append(RgbaPlane(color=rgba[:, :, :3], alpha=rgba[:, :, 3],
                                    depth=float(depth)))
        origins.append((x, y))
        tiles.append(TileMpi(planes=tuple(planes), origin=(x, y)))
    if offset != len(data):
        raise InvariantError(f"{len(data) - offset} trailing bytes after last tile")
    grid = TileGrid(tile_size=h, stride=r, origins=tuple(origins),
                    image_width=width, image_height=height)
    return TiledMpi(grid=grid, tiles=tuple(tiles), n=n_max, source_camera=camera)


def read_tmpi(path) -> TiledMpi:
    with open(path, "rb") as f:
        return parse_tmpi_bytes(f.read())


def load_image(path) -> Image:
    """Load a color raster, normalized to [0, 1]."""
    with PilImage.open(path) as im:
        if im.mode in ("P", "L", "I;16", "I"):
            im = im.convert("RGB") if im.mode == "P" else im
        arr = np.asarray(im)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float32) / 255.0
    elif arr.dtype == np.uint16:
        arr = arr.astype(np.float32) / 65535.0
    elif arr.dtype == np.int32:
        arr = arr.astype(np.float32) / 65535.0
    else:
        arr = arr.astype(np.float32)
    return Image(np.clip(arr, 0.0, 1.0))


def save_image(image: Image, path) -> None:
    arr = np.round(np.asarray(image.data) * 255.0).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    PilImage.fromarray(arr).save(path)


def fill_depth_holes(depth: np.ndarray):
    """Replace non-positive / non-finite depths by the nearest valid value.

    Returns the repaired array and the number of filled pixels.
    """
    depth = np.asarray(depth, dtype=np.float64)
    invalid = ~np.isfinite(depth) | (depth <= 0)
    count = int(invalid.sum())
    if count == 0:
        return depth, 0
    if count == depth.size:
        raise ValueError("depth map has no valid pixels")
    _, idx = distance_transform_edt(invalid, return_indices=True)
    return depth[tuple(idx)], count


def load_depth(path, scale: float = 1.0) -> DepthMap:
    """Load a depth map: .npy float raster or 8/16-bit grayscale with scale.

    Integer rasters are multiplied by scale to get metric depth. Invalid
    pixels (zero, negative, NaN) are repaired by nearest-valid fill and the
    count is logged.
    """
    path = os.fspath(path)
    if path.endswith(".npy"):
        arr = np.load(path).astype(np.float64)
    else:
        with PilImage.open(path) as im:
            arr = np.asarray(im).astype(np.float64)
        if arr.ndim == 3:
            arr = arr[:, :, 0]
    arr = arr * scale
    arr, filled = fill_depth_holes(arr)
    if filled:
        log.info("load_depth: repaired %d invalid pixels in %s", filled, path)
    return DepthMap(arr)


def save_camera_path(cameras, path) -> None:
    """Write one camera per line: fx fy cx cy, 9 rotation entries, 3 translation."""
    with open(path, "w") as f:
        for cam in cameras:
            vals = [cam.fx, cam.fy, cam.cx, cam.cy,
                    *cam.rotation.ravel(), *cam.translation]
            f.write(" ".join(f"{v:.17g}" for v in vals) + "\n")


def load_camera_path(path) -> list:
    """Parse a camera path file; rotations are re-orthonormalized via SVD."""
    cameras = []
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            vals = [float(v) for v in line.split()]
            if len(vals) != 16:
                raise ValueError(f"{path}:{line_no}: expected 16 numbers, got {len(vals)}")
            R = np.array(vals[4:13]).reshape(3, 3)
            if not np.allclose(R @ R.T, np.eye(3), atol=1e-4):
                raise ValueError(f"{path}:{line_no}: rotation is not orthonormal")
            U, _, Vt = np.linalg.svd(R)
            R = U @ np.diag([1.0, 1.0, np.linalg.det(U @ Vt)]) @ Vt
            cameras.append(Camera(fx=vals[0], fy=vals[1], cx=vals[2], cy=vals[3],
                                  rotation=R, translation=np.array(vals[13:16])))
    if not cameras:
        raise ValueError(f"{path}: no cameras found")
    return cameras
