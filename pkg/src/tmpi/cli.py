"""Command-line interface for the tiled-MPI pipeline.

Subcommands: generate, render, render-path, metrics, info, ablate.
Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .ablation import run_ablation
from .io import (load_camera_path, load_depth, load_image, read_tmpi, save_image,
                 write_tmpi)
from .metrics import compute_metrics
from .mpigen import TmpiConfig, build_tmpi, texture_scalar_count
from .render import RenderTask, render_tmpi
from .tiling import default_stride


def _default_seed() -> int:
    env = os.environ.get("TMPI_SEED")
    return int(env) if env else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmpi", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tmpi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a TMPI from an RGB image and depth map")
    gen.add_argument("--image", required=True)
    gen.add_argument("--depth", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--tile-size", type=int, default=64)
    gen.add_argument("--planes", type=int, default=4)
    gen.add_argument("--stride", type=int, default=None,
                     help="tile stride; default tile-size - tile-size/8")
    gen.add_argument("--confidence", choices=["robust", "uniform"], default="robust")
    gen.add_argument("--soften", type=float, default=1.0, help="alpha soften radius")
    gen.add_argument("--depth-scale", type=float, default=1.0)
    gen.add_argument("--restarts", type=int, default=4)
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--seed", type=int, default=_default_seed())

    ren = sub.add_parser("render", help="render a novel view from a TMPI file")
    ren.add_argument("--tmpi", required=True)
    ren.add_argument("--camera", required=True, help="camera file (first line used)")
    ren.add_argument("--out", required=True)
    ren.add_argument("--workers", type=int, default=1)

    rpath = sub.add_parser("render-path", help="render a camera path to a directory")
    rpath.add_argument("--tmpi", required=True)
    rpath.add_argument("--path", required=True, help="camera path file, one camera per line")
    rpath.add_argument("--out-dir", required=True)
    rpath.add_argument("--workers", type=int, default=1)

    met = sub.add_parser("metrics", help="PSNR / SSIM / L1 between two images")
    met.add_argument("--a", required=True)
    met.add_argument("--b", required=True)
    met.add_argument("--crop", type=float, default=0.15)

    info = sub.add_parser("info", help="print TMPI header and memory accounting")
    info.add_argument("--tmpi", required=True)

    abl = sub.add_parser("ablate", help="compare plane-placement strategies on synthetic tiles")
    abl.add_argument("--tiles", type=int, default=100)
    abl.add_argument("--tile-size", type=int, default=64)
    abl.add_argument("--planes", type=int, default=4)
    abl.add_argument("--seed", type=int, default=_default_seed())
    return parser


def _cmd_generate(args) -> int:
    image = load_image(args.image)
    depth = load_depth(args.depth, scale=args.depth_scale)
    config = TmpiConfig(tile_size=args.tile_size, stride=args.stride,
                        planes=args.planes, restarts=args.restarts,
                        soften_radius=args.soften, confidence=args.confidence,
                        seed=args.seed, workers=args.workers)
    tmpi = build_tmpi(image, depth, config)
    write_tmpi(tmpi, args.out)
    print(f"wrote {args.out}: {tmpi.grid.num_tiles} tiles of "
          f"{tmpi.grid.tile_size}px, <= {tmpi.n} planes each")
    return 0


def _cmd_render(args) -> int:
    tmpi = read_tmpi(args.tmpi)
    cam = load_camera_path(args.camera)[0]
    size = (tmpi.grid.image_width, tmpi.grid.image_height)
    frame = render_tmpi(RenderTask(tmpi=tmpi, target=cam, out_size=size),
                        workers=args.workers)
    save_image(frame, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_render_path(args) -> int:
    tmpi = read_tmpi(args.tmpi)
    cameras = load_camera_path(args.path)
    size = (tmpi.grid.image_width, tmpi.grid.image_height)
    os.makedirs(args.out_dir, exist_ok=True)
    for i, cam in enumerate(cameras):
        frame = render_tmpi(RenderTask(tmpi=tmpi, target=cam, out_size=size),
                            workers=args.workers)
        out = os.path.join(args.out_dir, f"frame_{i:04d}.png")
        save_image(frame, out)
    print(f"wrote {len(cameras)} frames to {args.out_dir}")
    return 0


def _cmd_metrics(args) -> int:
    m = compute_metrics(load_image(args.a), load_image(args.b), crop_fraction=args.crop)
    print(f"psnr_db {m.psnr:.4f}")
    print(f"ssim {m.ssim:.6f}")
    print(f"l1 {m.l1:.6g}")
    return 0


def _cmd_info(args) -> int:
    tmpi = read_tmpi(args.tmpi)
    grid = tmpi.grid
    scalars = texture_scalar_count(tmpi)
    mono = grid.image_width * grid.image_height * 32 * 4
    print(f"image {grid.image_width}x{grid.image_height}")
    print(f"tile_size {grid.tile_size}  stride {grid.stride}")
    print(f"tiles {grid.num_tiles}  max_planes {tmpi.n}")
    print(f"planes_total {sum(len(t.planes) for t in tmpi.tiles)}")
    print(f"texture_scalars {scalars}")
    print(f"monolithic_mpi_32_scalars {mono}")
    print(f"ratio {scalars / mono:.4f}")
    return 0


def _cmd_ablate(args) -> int:
    means = run_ablation(num_tiles=args.tiles, size=args.tile_size,
                         n=args.planes, seed=args.seed)
    print(f"{'strategy':<20} mean_l1")
    for key in ("weighted_kmeans", "vanilla_kmeans", "linear_disparity"):
        print(f"{key:<20} {means[key]:.6f}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "render": _cmd_render,
    "render-path": _cmd_render_path,
    "metrics": _cmd_metrics,
    "info": _cmd_info,
    "ablate": _cmd_ablate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
