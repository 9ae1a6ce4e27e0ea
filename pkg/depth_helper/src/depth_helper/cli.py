"""CLI: estimate depth for a directory of images, write 16-bit PNGs.

Exit codes: 0 success, 1 hard error (model load, bad directory),
2 completed with per-image failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .estimate import DEFAULT_MODEL_ID, HelperConfig, ModelLoadError, estimate_depths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depth-helper",
        description="Run a pretrained monocular depth model over an image "
        "directory and write 16-bit grayscale depth PNGs.",
    )
    parser.add_argument("--images", type=Path, required=True, help="directory of RGB images")
    parser.add_argument("--out", type=Path, required=True, help="output directory for depth PNGs")
    parser.add_argument(
        "--model",
        default=DEFAULT_MODEL_ID,
        help=f"depth model id (default {DEFAULT_MODEL_ID}; 'luma' = built-in "
        "dependency-free proxy for smoke tests)",
    )
    parser.add_argument("--device", default="cpu", help="inference device (default cpu)")
    return parser


def main(argv=None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    config = HelperConfig(args.images, args.out, model_id=args.model, device=args.device)
    try:
        summary = estimate_depths(config)
    except ModelLoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"images:   {summary.count}")
    print(f"written:  {len(summary.written)}")
    print(f"failed:   {len(summary.failures)}")
    for stem, err in summary.failures:
        print(f"  {stem}: {err}", file=sys.stderr)
    return 2 if summary.failures else 0


if __name__ == "__main__":
    sys.exit(main())
