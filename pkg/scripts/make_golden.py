#!/usr/bin/env python3
"""Regenerate the golden fixtures under tests/golden/.

The fixtures pin down the binary container layout and the software
renderer's output so that format or pipeline drift shows up as a byte-level
diff. Deterministic: fixed seeds, single worker.

  scene.tmpi            full pipeline output on a seeded synthetic scene
  scene_identity.png    software render of scene.tmpi at the source camera
  single_plane.tmpi     one tile, one opaque plane at depth 3
  two_plane.tmpi        one tile, near stripe plane + far textured plane
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from tmpi import Camera, DepthMap, Image, TmpiConfig, build_tmpi, make_grid
from tmpi.io import save_image, write_tmpi
from tmpi.mpigen import RgbaPlane, TileMpi, TiledMpi
from tmpi.render import RenderTask, render_tmpi

GOLDEN = os.path.join(os.path.dirname(__file__), os.pardir, "tests", "golden")


def synthetic_scene(seed=7, height=48, width=64):
    rng = np.random.default_rng(seed)
    from scipy.ndimage import gaussian_filter
    rgb = np.stack([gaussian_filter(rng.random((height, width)), 3.0, mode="wrap")
                    for _ in range(3)], axis=2)
    rgb = (rgb - rgb.min()) / np.ptp(rgb)
    depth = gaussian_filter(rng.random((height, width)), 6.0, mode="wrap")
    depth = 1.5 + 4.0 * (depth - depth.min()) / np.ptp(depth)
    # a foreground box to give the placement something piecewise
    depth[12:30, 20:44] = 1.2
    return Image(rgb.astype(np.float32)), DepthMap(depth)


def checker(h, squares, lo=0.15, hi=0.9):
    yy, xx = np.indices((h, h))
    cell = h // squares
    return np.where(((yy // cell) + (xx // cell)) % 2 == 0, lo, hi).astype(np.float32)


def make_scene():
    image, depth = synthetic_scene()
    tmpi = build_tmpi(image, depth, TmpiConfig(tile_size=16, planes=4,
                                               soften_radius=0.0, restarts=2, seed=0))
    write_tmpi(tmpi, os.path.join(GOLDEN, "scene.tmpi"))
    frame = render_tmpi(RenderTask(tmpi=tmpi, target=tmpi.source_camera,
                                   out_size=(tmpi.grid.image_width,
                                             tmpi.grid.image_height)))
    save_image(frame, os.path.join(GOLDEN, "scene_identity.png"))


def make_single_plane():
    h = 32
    grid = make_grid(h, h, h, h)
    cam = Camera(fx=float(h), fy=float(h), cx=(h - 1) / 2, cy=(h - 1) / 2)
    color = np.repeat(checker(h, 4)[:, :, None], 3, axis=2)
    plane = RgbaPlane(color=color, alpha=np.ones((h, h), np.float32), depth=3.0)
    tmpi = TiledMpi(grid=grid, tiles=(TileMpi(planes=(plane,), origin=(0, 0)),),
                    n=1, source_camera=cam)
    write_tmpi(tmpi, os.path.join(GOLDEN, "single_plane.tmpi"))


def make_two_plane():
    h = 64
    grid = make_grid(h, h, h, h)
    cam = Camera(fx=float(h), fy=float(h), cx=(h - 1) / 2, cy=(h - 1) / 2)
    # near plane: opaque vertical stripe in the middle, red
    near_alpha = np.zeros((h, h), np.float32)
    near_alpha[:, 24:40] = 1.0
    near_color = np.zeros((h, h, 3), np.float32)
    near_color[:, :, 0] = 1.0
    near = RgbaPlane(color=near_color, alpha=near_alpha, depth=2.0)
    # far plane: fully opaque green/blue checker
    far_color = np.zeros((h, h, 3), np.float32)
    far_color[:, :, 1] = checker(h, 8)
    far_color[:, :, 2] = 1.0 - checker(h, 8)
    far = RgbaPlane(color=far_color, alpha=np.ones((h, h), np.float32), depth=8.0)
    tmpi = TiledMpi(grid=grid, tiles=(TileMpi(planes=(near, far), origin=(0, 0)),),
                    n=2, source_camera=cam)
    write_tmpi(tmpi, os.path.join(GOLDEN, "two_plane.tmpi"))


def main():
    os.makedirs(GOLDEN, exist_ok=True)
    make_scene()
    make_single_plane()
    make_two_plane()
    for name in sorted(os.listdir(GOLDEN)):
        path = os.path.join(GOLDEN, name)
        print(f"{name}  {os.path.getsize(path)} bytes")


if __name__ == "__main__":
    main()
