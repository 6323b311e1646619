"""Per-tile RGBA plane generation and the full tiled-MPI build pipeline.

Each tile's depth labels peel the color image into binary-alpha layers;
occluded regions are filled by pull-push pyramid inpainting and blended
back against the input via per-plane transmittance weights. Planes are
stored front-to-back (ascending depth).
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import Camera, ConfidenceMap, DepthMap, Image
from .placement import ClusterResult, estimate_confidence, place_planes
from .tiling import TileGrid, default_stride, make_grid, unfold

__all__ = [
    "RgbaPlane",
    "TileMpi",
    "TiledMpi",
    "TmpiConfig",
    "peel_layers",
    "inpaint_pyramid",
    "soften_alpha",
    "blend_background",
    "build_tile_mpi",
    "build_tmpi",
    "texture_scalar_count",
]

# binomial approximation to a Gaussian, used by the inpainting pyramid
_BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


@dataclass(frozen=True)
class RgbaPlane:
    """One fronto-parallel RGBA layer of a tile at a fixed metric depth."""

    color: np.ndarray  # (h, h, 3) in [0, 1]
    alpha: np.ndarray  # (h, h) in [0, 1]
    depth: float

    def __post_init__(self):
        if self.depth <= 0:
            raise ValueError("plane depth must be positive")


@dataclass(frozen=True)
class TileMpi:
    """Planes of one tile, sorted ascending by depth (nearest first)."""

    planes: tuple  # of RgbaPlane
    origin: tuple  # (x, y) pixels

    def __post_init__(self):
        depths = [p.depth for p in self.planes]
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValueError("plane depths must be strictly increasing")


@dataclass(frozen=True)
class TiledMpi:
    """The full tiled multiplane representation of one source image."""

    grid: TileGrid
    tiles: tuple  # of TileMpi, one per grid origin
    n: int
    source_camera: Camera

    def __post_init__(self):
        if len(self.tiles) != self.grid.num_tiles:
            raise ValueError("tile count does not match grid")
        if any(len(t.planes) > self.n for t in self.tiles):
            raise ValueError("tile exceeds plane budget")


@dataclass(frozen=True)
class TmpiConfig:
    tile_size: int = 64
    stride: int | None = None  # default h - h/8
    planes: int = 4
    restarts: int = 4
    soften_radius: float = 1.0
    confidence: str = "robust"  # or "uniform"
    seed: int = 0
    workers: int = 1

    def resolved_stride(self) -> int:
        return self.stride if self.stride is not None else default_stride(self.tile_size)


def peel_layers(tile_rgb: np.ndarray, labels: np.ndarray,
                planes: np.ndarray, origin=(0, 0)) -> TileMpi:
    """Split a tile into binary-alpha layers using depth labels as masks.

    Plane j is opaque exactly where label == j; its color there is the tile
    color, and zero elsewhere (to be inpainted). Per pixel exactly one
    plane is opaque.
    """
    out = []
    for j, depth in enumerate(planes):
        mask = (labels == j).astype(np.float32)
        color = tile_rgb.astype(np.float32) * mask[:, :, None]
        out.append(RgbaPlane(color=color, alpha=mask, depth=float(depth)))
    return TileMpi(planes=tuple(out), origin=tuple(origin))


def _masked_downsample(color: np.ndarray, mask: np.ndarray):
    """Blur color*mask and mask with the binomial kernel, then decimate."""
    cm = color * mask[:, :, None]
    num = ndimage.convolve1d(cm, _BINOMIAL5, axis=0, mode="constant")
    num = ndimage.convolve1d(num, _BINOMIAL5, axis=1, mode="constant")
    den = ndimage.convolve1d(mask, _BINOMIAL5, axis=0, mode="constant")
    den = ndimage.convolve1d(den, _BINOMIAL5, axis=1, mode="constant")
    num, den = num[::2, ::2], den[::2, ::2]
    coarse_mask = den > 0
    coarse = np.zeros_like(num)
    coarse[coarse_mask] = num[coarse_mask] / den[coarse_mask][:, None]
    return coarse, coarse_mask.astype(np.float64)


def _upsample_to(img: np.ndarray, shape) -> np.ndarray:
    zy = shape[0] / img.shape[0]
    zx = shape[1] / img.shape[1]
    return ndimage.zoom(img, (zy, zx, 1), order=1, grid_mode=True, mode="nearest")


def _pull_push(color: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if mask.all():
        return color
    if color.shape[0] <= 1 and color.shape[1] <= 1:
        return color
    coarse, coarse_mask = _masked_downsample(color, mask)
    filled = _pull_push(coarse, coarse_mask)
    up = _upsample_to(filled, color.shape[:2])
    m = mask[:, :, None].astype(bool)
    return np.where(m, color, up)


def inpaint_pyramid(color: np.ndarray, valid_mask: np.ndarray) -> np.ndarray:
    """Fill invalid pixels by pull-push through a masked Gaussian pyramid.

    Valid pixels are never changed; holes receive normalized coarse values
    pushed back down the pyramid. A fully invalid input is filled with
    mid-gray.
    """
    color = np.asarray(color, dtype=np.float64)
    mask = np.asarray(valid_mask, dtype=np.float64)
    if color.ndim != 3:
        raise ValueError("expected an HxWxC color raster")
    if mask.shape != color.shape[:2]:
        raise ValueError("mask shape must match color")
    if not mask.any():
        warnings.warn("inpaint_pyramid: no valid pixels, filling with mid-gray")
        return np.full_like(color, 0.5, dtype=np.float32)
    out = _pull_push(color, mask)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def soften_alpha(tile: TileMpi, radius: float) -> TileMpi:
    """Gaussian-blur every plane's alpha to soften peeled edges.

    radius 0 is the identity. Alphas stay in [0, 1]; the over-compositing
    weights of the result still telescope to a partition of unity.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return tile
    planes = []
    for p in tile.planes:
        a = ndimage.gaussian_filter(p.alpha.astype(np.float64), sigma=radius / 2.0,
                                    mode="nearest", truncate=3.0)
        a = np.clip(a, 0.0, 1.0).astype(np.float32)
        planes.append(RgbaPlane(color=p.color, alpha=a, depth=p.depth))
    return TileMpi(planes=tuple(planes), origin=tile.origin)


def blend_background(tile_rgb: np.ndarray, alphas, backgrounds):
    """Blend the input against per-plane backgrounds by transmittance.

    Planes are given back-to-front: alphas[k] for k > j lie in front of
    plane j. W_j is the product of (1 - alpha_k) over those occluders;
    the output color is W_j * input + (1 - W_j) * background_j. Where a
    plane is the frontmost visible surface W_j = 1 and it keeps the input
    color exactly.
    """
    tile_rgb = np.asarray(tile_rgb, dtype=np.float32)
    n = len(alphas)
    if len(backgrounds) != n:
        raise ValueError("need one background per plane")
    out = []
    for j in range(n):
        w = np.ones(tile_rgb.shape[:2], dtype=np.float32)
        for k in range(j + 1, n):
            w = w * (1.0 - np.asarray(alphas[k], dtype=np.float32))
        wj = w[:, :, None]
        out.append(wj * tile_rgb + (1.0 - wj) * np.asarray(backgrounds[j], dtype=np.float32))
    return out


def build_tile_mpi(tile_rgb: np.ndarray, tile_depth: np.ndarray,
                   tile_conf: np.ndarray, n: int,
                   restarts: int = 4, soften_radius: float = 1.0,
                   seed: int = 0, origin=(0, 0),
                   cluster: ClusterResult | None = None) -> TileMpi:
    """Full per-tile pipeline: place planes, peel, inpaint, blend, soften."""
    if cluster is None:
        cluster = place_planes(tile_depth, tile_conf, n, restarts=restarts, seed=seed)
    peeled = peel_layers(tile_rgb, cluster.labels, cluster.planes, origin=origin)

    # backgrounds: each plane's own valid region pushed into its holes
    backs = [inpaint_pyramid(p.color, p.alpha > 0.5) for p in peeled.planes]

    # blend_background wants back-to-front; planes are stored front-to-back
    alphas_btf = [p.alpha for p in reversed(peeled.planes)]
    backs_btf = list(reversed(backs))
    colors_btf = blend_background(tile_rgb, alphas_btf, backs_btf)

    planes = tuple(
        RgbaPlane(color=np.clip(c, 0.0, 1.0).astype(np.float32), alpha=p.alpha, depth=p.depth)
        for p, c in zip(peeled.planes, reversed(colors_btf))
    )
    tile = TileMpi(planes=planes, origin=tuple(origin))
    return soften_alpha(tile, soften_radius)


def build_tmpi(image: Image, depth: DepthMap, config: TmpiConfig = TmpiConfig(),
               source_camera: Camera | None = None) -> TiledMpi:
    """Build the tiled multiplane representation of one RGB-D input."""
    if image.height != depth.height or image.width != depth.width:
        raise ValueError("image and depth dimensions differ")
    if source_camera is None:
        f = max(image.width, image.height)
        source_camera = Camera(fx=f, fy=f,
                               cx=(image.width - 1) / 2.0,
                               cy=(image.height - 1) / 2.0)
    h = config.tile_size
    r = config.resolved_stride()
    grid = make_grid(image.width, image.height, h, r)

    if config.confidence == "robust":
        conf = estimate_confidence(depth)
    elif config.confidence == "uniform":
        conf = np.ones((image.height, image.width), dtype=np.float32)
    else:
        raise ValueError(f"unknown confidence mode {config.confidence!r}")

    rgb = image.data[:, :, :3]
    rgb_tiles = unfold(rgb, grid).tiles
    depth_tiles = unfold(depth.data, grid).tiles
    conf_tiles = unfold(conf, grid).tiles

    seeds = np.random.SeedSequence(config.seed).generate_state(grid.num_tiles)

    def one(i):
        return build_tile_mpi(
            rgb_tiles[i], depth_tiles[i], conf_tiles[i], config.planes,
            restarts=config.restarts, soften_radius=config.soften_radius,
            seed=int(seeds[i]), origin=grid.origins[i])

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            tiles = tuple(pool.map(one, range(grid.num_tiles)))
    else:
        tiles = tuple(one(i) for i in range(grid.num_tiles))
    return TiledMpi(grid=grid, tiles=tiles, n=config.planes, source_camera=source_camera)


def texture_scalar_count(tmpi: TiledMpi) -> int:
    """Total RGBA scalars stored across all tiles."""
    h = tmpi.grid.tile_size
    return sum(len(t.planes) for t in tmpi.tiles) * h * h * 4
