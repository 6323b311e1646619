"""Tiled multiplane images: adaptive per-tile depth planes from a single
RGB-D input, a deterministic software novel-view renderer, and a binary
export consumed by the browser viewer."""

__version__ = "0.1.0"

from .core import (Camera, ConfidenceMap, DepthMap, Image, Pose,
                   intrinsics_matrix, relative_pose, shift_principal_point)
from .mpigen import RgbaPlane, TileMpi, TiledMpi, TmpiConfig, build_tmpi
from .render import RenderTask, render_mpi_reference, render_path, render_tmpi
from .tiling import TileGrid, fold, make_grid, unfold

__all__ = [
    "Camera", "ConfidenceMap", "DepthMap", "Image", "Pose",
    "intrinsics_matrix", "relative_pose", "shift_principal_point",
    "RgbaPlane", "TileMpi", "TiledMpi", "TmpiConfig", "build_tmpi",
    "RenderTask", "render_mpi_reference", "render_path", "render_tmpi",
    "TileGrid", "fold", "make_grid", "unfold",
]
