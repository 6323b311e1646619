"""Unfold full-frame rasters into overlapping square tiles and fold them back.

Tiles live on a regular grid with stride r <= h. The final row/column origin
is clamped to the image edge so every tile sits fully inside the frame and
the union of tile footprints covers every pixel. Folding blends overlaps
with a separable ramp weight followed by per-pixel normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TileGrid",
    "TileStack",
    "make_grid",
    "unfold",
    "fold",
    "default_blend_weights",
    "default_stride",
]

RAMP_EPS = 1e-3


def default_stride(h: int) -> int:
    """Stride giving an overlap of h/8 between neighboring tiles."""
    return h - h // 8


def _axis_origins(extent: int, h: int, r: int) -> list[int]:
    origins = list(range(0, extent - h + 1, r))
    if origins[-1] != extent - h:
        origins.append(extent - h)
    return origins


@dataclass(frozen=True)
class TileGrid:
    tile_size: int
    stride: int
    origins: tuple  # ((x, y), ...) row-major
    image_width: int
    image_height: int

    @property
    def num_tiles(self) -> int:
        return len(self.origins)


@dataclass(frozen=True)
class TileStack:
    grid: TileGrid
    tiles: np.ndarray  # (m, h, h) or (m, h, h, C)


def make_grid(width: int, height: int, h: int, r: int) -> TileGrid:
    """Regular tile grid over a width x height frame.

    Origins step by r and the last origin per axis is clamped to the frame
    edge, so coverage is complete and no tile crosses the boundary.
    """
    if h < 8:
        raise ValueError(f"tile size must be >= 8, got {h}")
    if h > min(width, height):
        raise ValueError(f"tile size {h} exceeds image extent {width}x{height}")
    if r < 1 or r > h:
        raise ValueError(f"stride must satisfy 1 <= r <= h, got r={r}, h={h}")
    xs = _axis_origins(width, h, r)
    ys = _axis_origins(height, h, r)
    origins = tuple((x, y) for y in ys for x in xs)
    return TileGrid(tile_size=h, stride=r, origins=origins,
                    image_width=width, image_height=height)


def unfold(raster: np.ndarray, grid: TileGrid) -> TileStack:
    """Crop the h x h block at every grid origin. Bit-exact, no resampling."""
    raster = np.asarray(raster)
    if raster.shape[0] != grid.image_height or raster.shape[1] != grid.image_width:
        raise ValueError(
            f"raster shape {raster.shape[:2]} does not match grid "
            f"{grid.image_height}x{grid.image_width}")
    h = grid.tile_size
    tiles = np.stack([raster[y:y + h, x:x + h] for x, y in grid.origins])
    return TileStack(grid=grid, tiles=tiles)


def default_blend_weights(h: int, r: int) -> np.ndarray:
    """Separable h x h blend weights: linear edge ramps over the overlap band.

    The 1-D profile rises from RAMP_EPS to 1 across the h - r overlap pixels
    at each end and is 1 in the interior. With per-pixel normalization at
    fold time the weights form a partition of unity.
    """
    if r > h:
        raise ValueError("stride exceeds tile size")
    band = h - r
    w = np.ones(h, dtype=np.float64)
    if band > 0:
        ramp = RAMP_EPS + (1.0 - RAMP_EPS) * np.arange(band) / band
        w[:band] = ramp
        w[h - band:] = ramp[::-1]
    return np.outer(w, w)


def fold(stack: TileStack, weights: np.ndarray) -> np.ndarray:
    """Weighted overlap-average of a tile stack back to a full-frame raster."""
    grid = stack.grid
    h = grid.tile_size
    if weights.shape != (h, h):
        raise ValueError(f"weights must be {h}x{h}, got {weights.shape}")
    tiles = np.asarray(stack.tiles, dtype=np.float64)
    extra = tiles.shape[3:]  # () or (C,)
    num = np.zeros((grid.image_height, grid.image_width) + extra)
    den = np.zeros((grid.image_height, grid.image_width))
    w = weights if not extra else weights[:, :, None]
    for tile, (x, y) in zip(tiles, grid.origins):
        num[y:y + h, x:x + h] += w * tile
        den[y:y + h, x:x + h] += weights
    if extra:
        den = den[:, :, None]
    return num / den
