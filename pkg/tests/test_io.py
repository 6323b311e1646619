import numpy as np
import pytest

from conftest import random_tmpi
from tmpi import Camera
from tmpi.io import (BadMagicError, InvariantError, TruncatedFileError,
                     VersionError, fill_depth_holes, load_camera_path,
                     load_depth, load_image, parse_tmpi_bytes, read_tmpi,
                     save_camera_path, save_image, tmpi_bytes, write_tmpi)
from tmpi.core import Image


def assert_tmpi_close(a, b):
    assert a.grid == b.grid
    assert a.n == b.n
    cam_a, cam_b = a.source_camera, b.source_camera
    assert (cam_a.fx, cam_a.fy, cam_a.cx, cam_a.cy) == (cam_b.fx, cam_b.fy, cam_b.cx, cam_b.cy)
    assert np.array_equal(cam_a.rotation, cam_b.rotation)
    assert np.array_equal(cam_a.translation, cam_b.translation)
    assert len(a.tiles) == len(b.tiles)
    for ta, tb in zip(a.tiles, b.tiles):
        assert tuple(ta.origin) == tuple(tb.origin)
        assert len(ta.planes) == len(tb.planes)
        for pa, pb in zip(ta.planes, tb.planes):
            # depths survive exactly as f32; colors are u8-quantized, and
            # round-to-nearest error is at most 1/510
            assert np.float32(pa.depth) == np.float32(pb.depth)
            assert np.max(np.abs(pa.color - pb.color)) <= 0.5 / 255 + 1e-7
            assert np.max(np.abs(pa.alpha - pb.alpha)) <= 0.5 / 255 + 1e-7


class TestRoundtrip:
    def test_bytes_roundtrip_many(self, rng):
        for _ in range(50):
            tmpi = random_tmpi(rng)
            assert_tmpi_close(tmpi, parse_tmpi_bytes(tmpi_bytes(tmpi)))

    def test_file_roundtrip(self, rng, tmp_path):
        tmpi = random_tmpi(rng)
        path = tmp_path / "scene.tmpi"
        write_tmpi(tmpi, path)
        assert_tmpi_close(tmpi, read_tmpi(path))

    def test_serialization_deterministic(self, rng):
        tmpi = random_tmpi(rng)
        assert tmpi_bytes(tmpi) == tmpi_bytes(tmpi)

    def test_quantized_payload_is_fixed_point(self, rng):
        # parsing then re-serializing an already-quantized container is
        # byte-identical
        data = tmpi_bytes(random_tmpi(rng))
        assert tmpi_bytes(parse_tmpi_bytes(data)) == data

    def test_atomic_write_replaces(self, rng, tmp_path):
        path = tmp_path / "scene.tmpi"
        path.write_bytes(b"garbage")
        tmpi = random_tmpi(rng)
        write_tmpi(tmpi, path)
        assert_tmpi_close(tmpi, read_tmpi(path))
        assert list(tmp_path.iterdir()) == [path]


class TestValidation:
    def test_bad_magic(self, rng):
        data = bytearray(tmpi_bytes(random_tmpi(rng)))
        data[:4] = b"XMPI"
        with pytest.raises(BadMagicError):
            parse_tmpi_bytes(bytes(data))

    def test_unsupported_version(self, rng):
        data = bytearray(tmpi_bytes(random_tmpi(rng)))
        data[4:6] = (99).to_bytes(2, "little")
        with pytest.raises(VersionError):
            parse_tmpi_bytes(bytes(data))

    def test_truncation_names_failing_tile(self, rng):
        data = tmpi_bytes(random_tmpi(rng))
        with pytest.raises(TruncatedFileError, match=r"tile \d"):
            parse_tmpi_bytes(data[: len(data) // 4])

    def test_truncated_header(self):
        with pytest.raises(TruncatedFileError):
            parse_tmpi_bytes(b"TMPI" + b"\x00" * 10)

    def test_trailing_bytes_rejected(self, rng):
        data = tmpi_bytes(random_tmpi(rng))
        with pytest.raises(InvariantError, match="trailing"):
            parse_tmpi_bytes(data + b"\x00")

    def test_empty_input(self):
        with pytest.raises(BadMagicError):
            parse_tmpi_bytes(b"")

    def test_nonincreasing_depths_rejected(self, rng):
        tmpi = random_tmpi(rng)
        data = bytearray(tmpi_bytes(tmpi))
        # first tile's depths live right after the tile head; make them equal
        from tmpi.io import _HEADER, _TILE_HEAD
        off = _HEADER.size + _TILE_HEAD.size
        k = len(tmpi.tiles[0].planes)
        if k >= 2:
            data[off:off + 4 * k] = np.full(k, 2.0, dtype="<f4").tobytes()
            with pytest.raises(InvariantError):
                parse_tmpi_bytes(bytes(data))

    def test_errors_are_value_errors(self):
        # callers can catch the whole taxonomy as ValueError
        with pytest.raises(ValueError):
            parse_tmpi_bytes(b"nope")


class TestRasterIo:
    def test_save_load_u8_roundtrip(self, rng, tmp_path):
        img = Image(rng.random((16, 24, 3)).astype(np.float32))
        path = tmp_path / "img.png"
        save_image(img, path)
        back = load_image(path)
        assert back.data.shape == (16, 24, 3)
        assert np.max(np.abs(back.data - img.data)) <= 0.5 / 255 + 1e-7

    def test_u8_white_is_one(self, tmp_path):
        from PIL import Image as PilImage
        path = tmp_path / "white.png"
        PilImage.fromarray(np.full((4, 4, 3), 255, dtype=np.uint8)).save(path)
        assert np.all(load_image(path).data == 1.0)

    def test_load_depth_npy(self, rng, tmp_path):
        d = rng.uniform(1, 5, (8, 8))
        path = tmp_path / "depth.npy"
        np.save(path, d)
        assert np.allclose(load_depth(path).data, d)

    def test_load_depth_u16_scale(self, tmp_path):
        from PIL import Image as PilImage
        arr = np.full((4, 4), 1000, dtype=np.uint16)
        path = tmp_path / "depth.png"
        PilImage.fromarray(arr).save(path)
        d = load_depth(path, scale=0.001)
        assert np.allclose(d.data, 1.0)

    def test_depth_holes_repaired(self, tmp_path):
        arr = np.full((8, 8), 2.0)
        arr[0, 0] = 0.0
        arr[3, 4] = np.nan
        path = tmp_path / "depth.npy"
        np.save(path, arr)
        d = load_depth(path)
        assert np.all(d.data == 2.0)

    def test_fill_depth_holes_count_and_values(self):
        arr = np.array([[1.0, 0.0, 3.0], [1.0, -2.0, 3.0]])
        filled, count = fill_depth_holes(arr)
        assert count == 2
        assert np.all(filled > 0)
        # valid pixels untouched
        assert filled[0, 0] == 1.0 and filled[0, 2] == 3.0

    def test_fill_depth_all_invalid(self):
        with pytest.raises(ValueError):
            fill_depth_holes(np.zeros((4, 4)))


class TestCameraPath:
    def test_roundtrip(self, tmp_path):
        from scipy.spatial.transform import Rotation
        cams = [
            Camera(fx=100, fy=110, cx=31.5, cy=23.5,
                   rotation=Rotation.from_rotvec([0.01 * i, 0, 0.02]).as_matrix(),
                   translation=[0.1 * i, 0, -0.05])
            for i in range(4)
        ]
        path = tmp_path / "path.txt"
        save_camera_path(cams, path)
        back = load_camera_path(path)
        assert len(back) == 4
        for a, b in zip(cams, back):
            assert (a.fx, a.fy, a.cx, a.cy) == (b.fx, b.fy, b.cx, b.cy)
            assert np.allclose(a.rotation, b.rotation, atol=1e-12)
            assert np.allclose(a.translation, b.translation, atol=1e-12)

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "path.txt"
        cam = Camera(fx=100, fy=100, cx=10, cy=10)
        save_camera_path([cam], path)
        text = "# a comment\n\n" + path.read_text()
        path.write_text(text)
        assert len(load_camera_path(path)) == 1

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "path.txt"
        path.write_text("1 2 3\n")
        with pytest.raises(ValueError, match="16 numbers"):
            load_camera_path(path)

    def test_non_orthonormal_rejected(self, tmp_path):
        path = tmp_path / "path.txt"
        vals = [100, 100, 10, 10, 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]
        path.write_text(" ".join(str(v) for v in vals) + "\n")
        with pytest.raises(ValueError, match="orthonormal"):
            load_camera_path(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "path.txt"
        path.write_text("# only comments\n")
        with pytest.raises(ValueError):
            load_camera_path(path)
