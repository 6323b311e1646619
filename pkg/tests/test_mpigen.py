import numpy as np
import pytest

from conftest import centered_camera, random_depth, random_image
from tmpi import DepthMap, Image, TmpiConfig, build_tmpi
from tmpi.mpigen import (RgbaPlane, TileMpi, blend_background, build_tile_mpi,
                         inpaint_pyramid, peel_layers, soften_alpha,
                         texture_scalar_count)


def over_weights(alphas_front_to_back):
    """Compositing weight of each plane plus residual transmittance."""
    alphas = list(alphas_front_to_back)
    weights = []
    for j, a in enumerate(alphas):
        occ = np.ones_like(a)
        for k in range(j):  # planes nearer than j
            occ = occ * (1.0 - alphas[k])
        weights.append(a * occ)
    residual = np.ones_like(alphas[0])
    for a in alphas:
        residual = residual * (1.0 - a)
    return weights, residual


def composite_front_to_back(tile: TileMpi, background=0.0):
    weights, residual = over_weights([p.alpha for p in tile.planes])
    out = residual[:, :, None] * background
    for w, p in zip(weights, tile.planes):
        out = out + w[:, :, None] * p.color
    return out


class TestPeelLayers:
    def test_single_label(self, rng):
        tile = rng.random((8, 8, 3)).astype(np.float32)
        mpi = peel_layers(tile, np.zeros((8, 8), dtype=int), np.array([2.0, 5.0]))
        assert np.all(mpi.planes[0].alpha == 1.0)
        assert np.all(mpi.planes[1].alpha == 0.0)

    def test_checkerboard_partition(self):
        labels = np.indices((8, 8)).sum(axis=0) % 2
        tile = np.full((8, 8, 3), 0.5, dtype=np.float32)
        mpi = peel_layers(tile, labels, np.array([1.0, 2.0]))
        total = mpi.planes[0].alpha + mpi.planes[1].alpha
        assert np.all(total == 1.0)
        assert set(np.unique(mpi.planes[0].alpha)) == {0.0, 1.0}

    def test_binary_compositing_reproduces_tile(self, rng):
        tile = rng.random((8, 8, 3)).astype(np.float32)
        labels = rng.integers(0, 3, (8, 8))
        mpi = peel_layers(tile, labels, np.array([1.0, 2.0, 3.0]))
        assert np.allclose(composite_front_to_back(mpi), tile, atol=1e-7)

    def test_one_hot(self, rng):
        labels = rng.integers(0, 4, (8, 8))
        mpi = peel_layers(rng.random((8, 8, 3)), labels, np.array([1.0, 2, 3, 4]))
        stack = np.stack([p.alpha for p in mpi.planes])
        assert np.all(np.sum(stack, axis=0) == 1.0)
        assert np.all((stack == 0) | (stack == 1))


class TestInpaintPyramid:
    def test_fully_valid_unchanged(self, rng):
        color = rng.random((16, 16, 3))
        out = inpaint_pyramid(color, np.ones((16, 16), dtype=bool))
        assert np.array_equal(out, color.astype(np.float32))

    def test_constant_propagation(self, rng):
        color = np.full((32, 32, 3), 0.7)
        mask = rng.random((32, 32)) < 0.3
        mask[0, 0] = True
        out = inpaint_pyramid(color * mask[:, :, None], mask)
        assert np.allclose(out, 0.7, atol=1e-6)

    def test_half_red_fill(self):
        color = np.zeros((16, 16, 3))
        color[:, :8, 0] = 1.0
        mask = np.zeros((16, 16), dtype=bool)
        mask[:, :8] = True
        out = inpaint_pyramid(color, mask)
        assert np.allclose(out[:, 8:, 0], 1.0, atol=1e-6)
        assert np.allclose(out[:, 8:, 1:], 0.0, atol=1e-6)

    def test_valid_pixels_confined(self, rng):
        color = rng.random((16, 16, 3))
        mask = rng.random((16, 16)) < 0.5
        mask[3, 3] = True
        out = inpaint_pyramid(color, mask)
        assert np.allclose(out[mask], color[mask].astype(np.float32), atol=1e-7)

    def test_no_valid_pixels_mid_gray(self):
        with pytest.warns(UserWarning):
            out = inpaint_pyramid(np.zeros((8, 8, 3)), np.zeros((8, 8), dtype=bool))
        assert np.all(out == 0.5)


class TestSoftenAlpha:
    def _binary_tile(self):
        alpha = np.zeros((16, 16), dtype=np.float32)
        alpha[:, 8:] = 1.0
        planes = (RgbaPlane(color=np.zeros((16, 16, 3), np.float32), alpha=alpha, depth=1.0),
                  RgbaPlane(color=np.zeros((16, 16, 3), np.float32), alpha=1.0 - alpha, depth=2.0))
        return TileMpi(planes=planes, origin=(0, 0))

    def test_radius_zero_is_identity(self):
        tile = self._binary_tile()
        assert soften_alpha(tile, 0) is tile

    def test_step_edge_gets_intermediate_band(self):
        out = soften_alpha(self._binary_tile(), 1.0)
        a = out.planes[0].alpha
        assert 0.0 < a[8, 7] < 1.0 and 0.0 < a[8, 8] < 1.0

    def test_partition_of_unity_preserved(self, rng):
        out = soften_alpha(self._binary_tile(), 2.0)
        weights, residual = over_weights([p.alpha for p in out.planes])
        total = np.sum(weights, axis=0) + residual
        assert np.allclose(total, 1.0, atol=1e-5)


class TestBlendBackground:
    def test_no_occluders_keeps_input(self, rng):
        tile = rng.random((8, 8, 3))
        alphas = [np.ones((8, 8)), np.zeros((8, 8))]
        backs = [rng.random((8, 8, 3)) for _ in range(2)]
        out = blend_background(tile, alphas, backs)
        # front plane (last in back-to-front order) always keeps the input
        assert np.allclose(out[1], tile, atol=1e-7)

    def test_full_occlusion_takes_background(self, rng):
        tile = rng.random((8, 8, 3))
        backs = [rng.random((8, 8, 3)) for _ in range(2)]
        out = blend_background(tile, [np.zeros((8, 8)), np.ones((8, 8))], backs)
        assert np.allclose(out[0], backs[0], atol=1e-7)

    def test_half_occlusion_blends_evenly(self, rng):
        tile = rng.random((8, 8, 3))
        backs = [rng.random((8, 8, 3)) for _ in range(2)]
        out = blend_background(tile, [np.zeros((8, 8)), np.full((8, 8), 0.5)], backs)
        assert np.allclose(out[0], 0.5 * tile + 0.5 * backs[0], atol=1e-7)


class TestBuildTileMpi:
    def test_constant_tile_single_opaque_plane(self):
        tile_rgb = np.full((16, 16, 3), 0.4, dtype=np.float32)
        depth = np.full((16, 16), 3.0)
        out = build_tile_mpi(tile_rgb, depth, np.ones((16, 16)), 4, soften_radius=0)
        assert len(out.planes) == 1
        assert np.all(out.planes[0].alpha == 1.0)
        assert np.allclose(out.planes[0].color, 0.4)

    def test_two_depth_tile_back_plane_inpainted(self):
        # left half near+red, right half far+green
        tile_rgb = np.zeros((16, 16, 3), dtype=np.float32)
        tile_rgb[:, :8, 0] = 1.0
        tile_rgb[:, 8:, 1] = 1.0
        depth = np.where(np.arange(16)[None, :] < 8, 1.0, 5.0) * np.ones((16, 1))
        out = build_tile_mpi(tile_rgb, depth, np.ones((16, 16)), 2, soften_radius=0)
        assert len(out.planes) == 2
        front, back = out.planes
        assert front.depth < back.depth
        assert np.all(front.alpha[:, :8] == 1.0)
        # behind the red foreground the far plane is green-inpainted
        assert np.allclose(back.color[:, :8, 1], 1.0, atol=1e-5)
        assert np.allclose(back.color[:, :8, 0], 0.0, atol=1e-5)

    def test_source_compositing_reproduces_tile(self, rng):
        tile_rgb = rng.random((16, 16, 3)).astype(np.float32)
        depth = rng.uniform(1, 10, (16, 16))
        out = build_tile_mpi(tile_rgb, depth, np.ones((16, 16)), 4, soften_radius=0)
        assert np.allclose(composite_front_to_back(out), tile_rgb, atol=1e-5)


class TestBuildTmpi:
    def test_grid_and_plane_budget(self, rng):
        image = random_image(rng, 256, 384)
        depth = random_depth(rng, 256, 384)
        tmpi = build_tmpi(image, depth, TmpiConfig(soften_radius=0, restarts=2))
        assert tmpi.grid.num_tiles == 35
        assert all(len(t.planes) <= 4 for t in tmpi.tiles)

    def test_constant_input_single_planes(self):
        image = Image(np.full((64, 128, 3), 0.3, dtype=np.float32))
        depth = DepthMap(np.full((64, 128), 2.0))
        tmpi = build_tmpi(image, depth, TmpiConfig(soften_radius=0))
        assert all(len(t.planes) == 1 for t in tmpi.tiles)

    def test_texture_memory_below_monolithic(self, rng):
        image = random_image(rng, 96, 128)
        depth = random_depth(rng, 96, 128)
        tmpi = build_tmpi(image, depth, TmpiConfig(soften_radius=0, restarts=2))
        m = tmpi.grid.num_tiles
        h = tmpi.grid.tile_size
        assert texture_scalar_count(tmpi) <= m * 4 * h * h * 4
        assert texture_scalar_count(tmpi) < 96 * 128 * 32 * 4

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            build_tmpi(random_image(rng, 64, 64), random_depth(rng, 64, 72))

    def test_partition_of_unity_invariant(self, rng):
        image = random_image(rng, 64, 96)
        depth = random_depth(rng, 64, 96)
        tmpi = build_tmpi(image, depth, TmpiConfig(soften_radius=1.0, restarts=2))
        for tile in tmpi.tiles:
            weights, residual = over_weights([p.alpha for p in tile.planes])
            total = np.sum(weights, axis=0) + residual
            assert np.allclose(total, 1.0, atol=1e-5)
