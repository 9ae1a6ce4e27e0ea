"""Command-line surface.

Subcommands:
    gen      build an image-flow dataset from paired image/depth dirs
    video    same, over per-sequence frame directories
    viz      colorize a .flo file to PNG
    inspect  stage-by-stage view of one depth map's conversion

Exit codes are the only machine contract: 0 success, 1 hard error
(configuration, format, pipeline abort), 2 completed with per-sample
failures. All randomness flows through --seed (default 0); nothing is
time-seeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import (
    InvalidInputError,
    depth_to_motion,
    normalize_depth,
    reverse_map,
    sample_augmentation,
    shift_map,
    zero_motion,
)
from .flowio import FormatError, read_depth_auto, read_flo, write_png_gray8, write_png_rgb
from .flowviz import channel_to_gray, depth_to_gray, render_flow
from .pipeline import (
    ConfigurationError,
    DatasetConfig,
    DatasetManifest,
    PipelineError,
    run_dataset,
    simulate_video_flows,
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 on usage errors (2 is reserved)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=_u64, default=0, help="global seed (default 0)")
    p.add_argument("--jobs", type=_positive, default=1, help="parallel workers (default 1)")
    p.add_argument("--flo", action="store_true", help="also write raw UV fields as .flo")
    p.add_argument("--no-png", action="store_true", help="skip the RGB flow PNGs")
    p.add_argument(
        "--variants", type=_positive, default=1, help="flow variants per image (default 1)"
    )
    p.add_argument(
        "--shared-reverse",
        action="store_true",
        help="share one value-reverse switch between the x and y axes",
    )
    p.add_argument("--json", action="store_true", help="print the summary as JSON")


def build_parser() -> _Parser:
    parser = _Parser(prog="flowsim", description="Simulate optical-flow maps from depth maps.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    gen = sub.add_parser("gen", help="generate a dataset from image/depth directories")
    gen.add_argument("--images", type=Path, required=True, help="directory of RGB images")
    gen.add_argument(
        "--depths", type=Path, required=True, help="directory of depth maps (.png 16-bit or .pfm)"
    )
    _add_dataset_flags(gen)
    gen.set_defaults(func=_cmd_gen)

    video = sub.add_parser("video", help="generate per-frame flows for video sequences")
    video.add_argument(
        "--frames", type=Path, required=True, help="directory of per-sequence frame dirs"
    )
    video.add_argument("--depths", type=Path, required=True, help="matching depth directory")
    _add_dataset_flags(video)
    video.set_defaults(func=_cmd_video)

    viz = sub.add_parser("viz", help="colorize a .flo motion field to PNG")
    viz.add_argument("--flo", type=Path, required=True, help="input .flo file")
    viz.add_argument("--out", type=Path, required=True, help="output PNG path")
    viz.set_defaults(func=_cmd_viz)

    inspect = sub.add_parser("inspect", help="show the conversion stages for one depth map")
    inspect.add_argument("--depth", type=Path, required=True, help="depth file (.png or .pfm)")
    inspect.add_argument("--seed", type=_u64, default=0, help="augmentation seed (default 0)")
    inspect.add_argument(
        "--shared-reverse",
        action="store_true",
        help="share one value-reverse switch between the x and y axes",
    )
    inspect.add_argument(
        "--stages", action="store_true", help="write the five stage images (requires --out)"
    )
    inspect.add_argument("--out", type=Path, help="directory for stage images")
    inspect.set_defaults(func=_cmd_inspect)

    return parser


def _print_summary(manifest: DatasetManifest, as_json: bool) -> None:
    manifest_path = manifest.config.output_dir / "manifest.json"
    if as_json:
        print(
            json.dumps(
                {
                    "matched_pairs": manifest.matched_pairs,
                    "records": len(manifest.records),
                    "succeeded": manifest.succeeded,
                    "failed": manifest.failed,
                    "degenerate": manifest.degenerate_count,
                    "wall_time_s": manifest.wall_time_s,
                    "manifest": str(manifest_path),
                }
            )
        )
        return
    print(f"matched pairs: {manifest.matched_pairs}")
    print(f"records:       {len(manifest.records)}")
    print(f"succeeded:     {manifest.succeeded}")
    print(f"failed:        {manifest.failed}")
    print(f"degenerate:    {manifest.degenerate_count}")
    print(f"wall time:     {manifest.wall_time_s:.2f}s")
    print(f"manifest:      {manifest_path}")


def _dataset_config(args, images_dir: Path) -> DatasetConfig:
    return DatasetConfig(
        images_dir=images_dir,
        depths_dir=args.depths,
        output_dir=args.out,
        global_seed=args.seed,
        emit_flo=args.flo,
        emit_png=not args.no_png,
        shared_reverse=args.shared_reverse,
        jobs=args.jobs,
        variants=args.variants,
    )


def _cmd_gen(args) -> int:
    manifest = run_dataset(_dataset_config(args, args.images))
    _print_summary(manifest, args.json)
    return 2 if manifest.failed else 0


def _cmd_video(args) -> int:
    config = _dataset_config(args, args.frames)
    manifest = simulate_video_flows(args.frames, args.depths, config)
    _print_summary(manifest, args.json)
    return 2 if manifest.failed else 0


def _cmd_viz(args) -> int:
    field = read_flo(args.flo)
    write_png_rgb(render_flow(field).pixels, args.out)
    print(f"wrote {args.out}")
    return 0


def _channel_stats(name: str, u, v) -> str:
    return (
        f"{name}: u[min={u.min():+.6f}, max={u.max():+.6f}, mean={u.mean():+.6f}] "
        f"v[min={v.min():+.6f}, max={v.max():+.6f}, mean={v.mean():+.6f}]"
    )


def _cmd_inspect(args) -> int:
    if args.stages and args.out is None:
        print("error: --stages requires --out", file=sys.stderr)
        return 1
    raw = read_depth_auto(args.depth)
    depth = normalize_depth(raw)
    params = sample_augmentation(args.seed, shared_reverse=args.shared_reverse)

    print(
        f"depth: {depth.width}x{depth.height} "
        f"raw[min={raw.values.min():.6f}, max={raw.values.max():.6f}] "
        f"normalized[min={depth.values.min():.6f}, max={depth.values.max():.6f}] "
        f"degenerate={depth.degenerate}"
    )
    print(
        f"seed {args.seed}: "
        f"x(delta={params.x.delta}, epsilon={params.x.epsilon:+.6f}, eta={params.x.eta:.6f}) "
        f"y(delta={params.y.delta}, epsilon={params.y.epsilon:+.6f}, eta={params.y.eta:.6f})"
    )

    if depth.degenerate:
        motion = zero_motion(depth.height, depth.width)
        rev_u = rev_v = sh_u = sh_v = motion.u
        print("constant depth: motion field is identically zero")
    else:
        rev_u = reverse_map(depth, params.x.delta)
        rev_v = reverse_map(depth, params.y.delta)
        sh_u = shift_map(rev_u, params.x.epsilon)
        sh_v = shift_map(rev_v, params.y.epsilon)
        motion = depth_to_motion(depth, params)

    print(_channel_stats("stage reversed", rev_u, rev_v))
    print(_channel_stats("stage shifted ", sh_u, sh_v))
    print(_channel_stats("stage scaled  ", motion.u, motion.v))
    print(f"max norm (scaled): {motion.max_norm():.6f}")

    if args.stages:
        out = Path(args.out)
        stem = Path(args.depth).stem
        write_png_gray8(depth_to_gray(depth), out / f"{stem}_1_depth.png")
        write_png_gray8(channel_to_gray(rev_u, -1.0, 1.0), out / f"{stem}_2_reversed.png")
        write_png_gray8(channel_to_gray(sh_u, -2.0, 2.0), out / f"{stem}_3_shifted.png")
        write_png_gray8(channel_to_gray(motion.u, -2.0, 2.0), out / f"{stem}_4_scaled.png")
        write_png_rgb(render_flow(motion).pixels, out / f"{stem}_5_flow.png")
        print(f"wrote 5 stage images to {out}")
    return 0


def main(argv=None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ConfigurationError, PipelineError, FormatError, InvalidInputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
