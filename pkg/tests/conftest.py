import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from tmpi import Camera, DepthMap, Image, TiledMpi, TmpiConfig, build_tmpi, make_grid
from tmpi.mpigen import RgbaPlane, TileMpi


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def smooth_field(rng, shape, sigma=3.0, low=0.0, high=1.0):
    f = gaussian_filter(rng.random(shape), sigma, mode="wrap")
    f = (f - f.min()) / max(np.ptp(f), 1e-12)
    return (low + (high - low) * f).astype(np.float64)


def random_image(rng, height, width):
    return Image(rng.random((height, width, 3)).astype(np.float32))


def random_depth(rng, height, width, d_min=1.0, d_max=10.0):
    return DepthMap(rng.uniform(d_min, d_max, (height, width)))


def centered_camera(width, height, f=100.0):
    return Camera(fx=f, fy=f, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)


def random_tmpi(rng, width=128, height=96, h=64, r=56, n=3):
    """A TiledMpi with random planes, for format and renderer tests."""
    grid = make_grid(width, height, h, r)
    tiles = []
    for origin in grid.origins:
        k = int(rng.integers(1, n + 1))
        depths = np.sort(rng.uniform(1.0, 10.0, k))
        depths += np.arange(k) * 1e-3  # ensure strict increase
        planes = tuple(
            RgbaPlane(color=rng.random((h, h, 3)).astype(np.float32),
                      alpha=rng.random((h, h)).astype(np.float32),
                      depth=float(d))
            for d in depths)
        tiles.append(TileMpi(planes=planes, origin=origin))
    cam = centered_camera(width, height)
    return TiledMpi(grid=grid, tiles=tuple(tiles), n=n, source_camera=cam)
