"""Domain types (rasters, cameras) and the projective math shared by all stages.

Conventions, used everywhere:
  * Extrinsics are world-to-camera: x_cam = R @ x_world + t.
  * Pixel centers sit at integer coordinates, (u, v) in [0, W-1] x [0, H-1].
  * Raster buffers are float32; camera math is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Image",
    "DepthMap",
    "ConfidenceMap",
    "Camera",
    "Pose",
    "intrinsics_matrix",
    "shift_principal_point",
    "relative_pose",
    "project_points",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Image:
    """H x W x C raster of values in [0, 1]; C is 1, 3 or 4."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3, 4):
            raise ValueError(f"expected HxWxC raster with C in (1,3,4), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class DepthMap:
    """H x W raster of metric depths, strictly positive and finite."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"expected HxW depth raster, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("depth map contains non-finite values")
        if arr.min() <= 0.0:
            raise ValueError("depth values must be strictly positive")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ConfidenceMap:
    """H x W raster of per-pixel weights in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"expected HxW confidence raster, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("confidence map contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("confidence values must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def _check_rotation(R: np.ndarray, tol: float = 1e-6):
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    if not np.allclose(R @ R.T, np.eye(3), atol=tol):
        raise ValueError("rotation is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise ValueError("rotation determinant is not +1")


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: intrinsics in pixels plus world-to-camera pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        R = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        _check_rotation(R)
        object.__setattr__(self, "rotation", _freeze(R))
        object.__setattr__(self, "translation", _freeze(t))


@dataclass(frozen=True)
class Pose:
    """Rigid transform from one camera frame to another: x_b = R @ x_a + t."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        _check_rotation(R)
        object.__setattr__(self, "rotation", _freeze(R))
        object.__setattr__(self, "translation", _freeze(t))


def intrinsics_matrix(cam: Camera) -> np.ndarray:
    """3x3 calibration matrix [[fx,0,cx],[0,fy,cy],[0,0,1]]."""
    return np.array(
        [[cam.fx, 0.0, cam.cx], [0.0, cam.fy, cam.cy], [0.0, 0.0, 1.0]],
        dtype=np.float64,
    )


def shift_principal_point(cam: Camera, dx: float, dy: float) -> Camera:
    """Camera whose image origin is moved to (dx, dy) of the original frame.

    A world point that projected to (u, v) projects to (u - dx, v - dy)
    in the returned camera. Used to express tile-local pixel coordinates.
    """
    return Camera(
        fx=cam.fx,
        fy=cam.fy,
        cx=cam.cx - dx,
        cy=cam.cy - dy,
        rotation=cam.rotation,
        translation=cam.translation,
    )


def relative_pose(source: Camera, target: Camera) -> Pose:
    """Pose taking source-camera coordinates to target-camera coordinates."""
    R = target.rotation @ source.rotation.T
    t = target.translation - R @ source.translation
    return Pose(rotation=R, translation=t)


def project_points(cam: Camera, points_world: np.ndarray) -> np.ndarray:
    """Project Nx3 world points to Nx2 pixel coordinates."""
    pts = np.asarray(points_world, dtype=np.float64).reshape(-1, 3)
    cam_pts = pts @ cam.rotation.T + cam.translation
    K = intrinsics_matrix(cam)
    proj = cam_pts @ K.T
    return proj[:, :2] / proj[:, 2:3]
