"""Deterministic software renderer for tiled multiplane images.

Each plane is warped into the target view by the homography induced by its
fronto-parallel depth plane, computed with the tile-shifted intrinsic
matrix, and all planes across all tiles are composited in a single global
back-to-front order with the over operator. A monolithic full-frame MPI
renderer evaluating the closed-form compositing sum serves as an
independent oracle.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Camera, Image, intrinsics_matrix, relative_pose, shift_principal_point
from .mpigen import RgbaPlane, TiledMpi
from .tiling import default_blend_weights

__all__ = [
    "RenderTask",
    "plane_homography",
    "warp_plane",
    "composite_over",
    "composite_order",
    "render_tmpi",
    "render_mpi_reference",
    "render_path",
]


@dataclass(frozen=True)
class RenderTask:
    tmpi: TiledMpi
    target: Camera
    out_size: tuple  # (width, height)
    background: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        w, h = self.out_size
        if w < 1 or h < 1:
            raise ValueError("output size must be positive")


def plane_homography(source: Camera, target: Camera, tile_origin, depth: float) -> np.ndarray:
    """Homography taking tile-space pixels on the plane z=depth to target pixels.

    H = K_t (R + t n^T / depth) K_s'^-1 with n = (0,0,1), (R, t) the
    world-to-camera relative pose x_t = R x_s + t, and K_s' the source
    intrinsics shifted by the tile origin so (0,0) in tile space is the
    tile's top-left pixel. A camera moving right by b sees content at
    depth d shift left by f*b/d.
    """
    if depth <= 0:
        raise ValueError("plane depth must be positive")
    pose = relative_pose(source, target)
    K_t = intrinsics_matrix(target)
    K_s = intrinsics_matrix(shift_principal_point(source, *tile_origin))
    A = pose.rotation + np.outer(pose.translation, np.array([0.0, 0.0, 1.0])) / depth
    H = K_t @ A @ np.linalg.inv(K_s)
    if abs(np.linalg.det(H)) <= 1e-12:
        raise ValueError("degenerate homography")
    return H


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample img at continuous (x, y) with zero padding outside the domain."""
    h, w = img.shape[:2]
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    fx, fy = x - x0, y - y0
    out = np.zeros(x.shape + img.shape[2:], dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi, yi = x0 + dx, y0 + dy
            wgt = (fx if dx else 1 - fx) * (fy if dy else 1 - fy)
            inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            if not inside.any():
                continue
            vals = img[yi.clip(0, h - 1), xi.clip(0, w - 1)]
            wgt = np.where(inside, wgt, 0.0)
            out += wgt[..., None] * vals if img.ndim == 3 else wgt * vals
    return out


def warp_plane(plane: np.ndarray, H: np.ndarray, out_size) -> np.ndarray:
    """Inverse-warp an RGBA raster by H into a full-frame RGBA buffer.

    Only the clipped bounding box of the warped corners is touched; samples
    falling outside the source domain contribute zero color and alpha.
    """
    out_w, out_h = out_size
    src_h, src_w = plane.shape[:2]
    out = np.zeros((out_h, out_w, plane.shape[2]), dtype=np.float64)

    corners = np.array([
        [-0.5, -0.5, 1.0], [src_w - 0.5, -0.5, 1.0],
        [-0.5, src_h - 0.5, 1.0], [src_w - 0.5, src_h - 0.5, 1.0]]).T
    proj = H @ corners
    if np.all(proj[2] <= 0):
        return out
    if np.any(proj[2] <= 0):
        x_min, x_max, y_min, y_max = 0, out_w - 1, 0, out_h - 1
    else:
        px, py = proj[0] / proj[2], proj[1] / proj[2]
        x_min = max(int(np.floor(px.min())) - 1, 0)
        x_max = min(int(np.ceil(px.max())) + 1, out_w - 1)
        y_min = max(int(np.floor(py.min())) - 1, 0)
        y_max = min(int(np.ceil(py.max())) + 1, out_h - 1)
        if x_min > x_max or y_min > y_max:
            return out

    xs = np.arange(x_min, x_max + 1, dtype=np.float64)
    ys = np.arange(y_min, y_max + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    Hinv = np.linalg.inv(H)
    sx = Hinv[0, 0] * gx + Hinv[0, 1] * gy + Hinv[0, 2]
    sy = Hinv[1, 0] * gx + Hinv[1, 1] * gy + Hinv[1, 2]
    sw = Hinv[2, 0] * gx + Hinv[2, 1] * gy + Hinv[2, 2]
    front = sw > 1e-12
    sw = np.where(front, sw, 1.0)
    sampled = _bilinear(plane.astype(np.float64), sx / sw, sy / sw)
    sampled[~front] = 0.0
    out[y_min:y_max + 1, x_min:x_max + 1] = sampled
    return out


def composite_over(planes, background=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Iterative over on back-to-front RGBA rasters: out = a*c + (1-a)*out."""
    planes = list(planes)
    if not planes:
        raise ValueError("need at least one plane")
    h, w = planes[0].shape[:2]
    out = np.broadcast_to(np.asarray(background, dtype=np.float64), (h, w, 3)).copy()
    for p in planes:
        if p.shape[:2] != (h, w):
            raise ValueError("plane sizes differ")
        a = p[:, :, 3:4]
        out = a * p[:, :, :3] + (1.0 - a) * out
    return np.clip(out, 0.0, 1.0)


def composite_order(tmpi: TiledMpi):
    """Global back-to-front (tile, plane) order: depth descending, ties by
    tile index then plane index."""
    entries = [
        (t_idx, p_idx, tile.planes[p_idx].depth)
        for t_idx, tile in enumerate(tmpi.tiles)
        for p_idx in range(len(tile.planes))
    ]
    entries.sort(key=lambda e: (-e[2], e[0], e[1]))
    return [(t, p) for t, p, _ in entries]


def _tile_modulations(tmpi: TiledMpi) -> list:
    """Per-tile alpha modulation rasters implementing overlap blending.

    Tiles are visited in row-major order; each tile's ramp weight is
    normalized by the running per-pixel weight sum, so the first tile
    covering a pixel keeps modulation 1 (full coverage is preserved, which
    makes source-view reconstruction exact) while later tiles ramp in
    proportionally to their blend weights.
    """
    grid = tmpi.grid
    h = grid.tile_size
    ramp = default_blend_weights(h, grid.stride)
    S = np.zeros((grid.image_height, grid.image_width), dtype=np.float64)
    mods = []
    for x, y in grid.origins:
        patch = S[y:y + h, x:x + h]
        mods.append(ramp / (patch + ramp))
        patch += ramp
    return mods


def render_tmpi(task: RenderTask, workers: int = 1) -> Image:
    """Render a novel view of a tiled MPI with the software compositor."""
    tmpi = task.tmpi
    order = composite_order(tmpi)
    mods = _tile_modulations(tmpi)
    out_w, out_h = task.out_size

    def warp_entry(entry):
        t_idx, p_idx = entry
        tile = tmpi.tiles[t_idx]
        plane = tile.planes[p_idx]
        H = plane_homography(tmpi.source_camera, task.target, tile.origin, plane.depth)
        rgba = np.dstack([plane.color.astype(np.float64),
                          plane.alpha.astype(np.float64) * mods[t_idx]])
        return warp_plane(rgba, H, task.out_size)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            warped = list(pool.map(warp_entry, order))
    else:
        warped = [warp_entry(e) for e in order]

    out = np.broadcast_to(np.asarray(task.background, dtype=np.float64),
                          (out_h, out_w, 3)).copy()
    for rgba in warped:
        a = rgba[:, :, 3:4]
        out = a * rgba[:, :, :3] + (1.0 - a) * out
    return Image(np.clip(out, 0.0, 1.0).astype(np.float32))


def render_mpi_reference(planes, source: Camera, target: Camera, out_size,
                         background=(0.0, 0.0, 0.0)) -> Image:
    """Monolithic-MPI oracle: closed-form compositing sum over warped planes.

    planes are full-frame RgbaPlane objects sorted ascending by depth. The
    sum I = sum_i a_i c_i prod_{j in front of i} (1 - a_j) plus the
    background times total transmittance is evaluated directly, which is an
    independent route from the iterative over used by render_tmpi.
    """
    planes = sorted(planes, key=lambda p: p.depth)
    out_w, out_h = out_size
    warped = []
    for p in planes:
        H = plane_homography(source, target, (0.0, 0.0), p.depth)
        rgba = np.dstack([p.color.astype(np.float64), p.alpha.astype(np.float64)])
        warped.append(warp_plane(rgba, H, out_size))

    total = np.zeros((out_h, out_w, 3), dtype=np.float64)
    transmittance_all = np.ones((out_h, out_w, 1), dtype=np.float64)
    for i, rgba in enumerate(warped):
        a = rgba[:, :, 3:4]
        # occlusion by every plane nearer than plane i
        occ = np.ones((out_h, out_w, 1), dtype=np.float64)
        for j in range(i):
            occ = occ * (1.0 - warped[j][:, :, 3:4])
        total += a * rgba[:, :, :3] * occ
        transmittance_all = transmittance_all * (1.0 - a)
    bg = np.asarray(background, dtype=np.float64)
    total += transmittance_all * bg
    return Image(np.clip(total, 0.0, 1.0).astype(np.float32))


def render_path(tmpi: TiledMpi, cameras, out_size, background=(0.0, 0.0, 0.0),
                workers: int = 1):
    """Render one frame per camera, order preserved."""
    cameras = list(cameras)
    if not cameras:
        raise ValueError("camera list is empty")
    return [
        render_tmpi(RenderTask(tmpi=tmpi, target=cam, out_size=tuple(out_size),
                               background=tuple(background)), workers=workers)
        for cam in cameras
    ]
