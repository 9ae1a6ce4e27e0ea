"""Batch monocular depth estimation to 16-bit grayscale PNGs.

For each image the estimator's raw per-pixel depth is min-max scaled to
[0, 65535] and written as a single-channel 16-bit PNG with the same
relative file stem. That is the exact depth interchange format the flow
simulation pipeline consumes; which direction "near" points does not
matter because the consumer renormalizes and randomly reverses values.

Estimators are pluggable. "luma" is a built-in dependency-free proxy
(luminance blended with a vertical ramp) for smoke tests and offline
pipeline runs; the default is the pretrained DPT-Hybrid transformer,
loaded lazily through `transformers`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image, UnidentifiedImageError

log = logging.getLogger(__name__)

DEFAULT_MODEL_ID = "Intel/dpt-hybrid-midas"

IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".bmp", ".webp")

# An estimator maps an HxWx3 uint8 RGB array to an HxW float depth map.
Estimator = Callable[[np.ndarray], np.ndarray]


class ModelLoadError(RuntimeError):
    """The requested depth model could not be resolved or loaded."""


@dataclass(frozen=True)
class HelperConfig:
    images_dir: Path
    out_dir: Path
    model_id: str = DEFAULT_MODEL_ID
    device: str = "cpu"

    def __post_init__(self):
        object.__setattr__(self, "images_dir", Path(self.images_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass
class Summary:
    count: int
    written: list[str] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)


def luma_depth(image: np.ndarray) -> np.ndarray:
    """Dependency-free depth proxy: brightness plus a vertical ramp.

    Not a real depth model; it exists so the export pipeline and the
    downstream consumer can be exercised without model weights. The
    ramp keeps the output non-constant even for flat-color images.
    """
    rgb = image.astype(np.float64)
    luma = 0.2126 * rgb[..., 0] + 0.7152 * rgb[..., 1] + 0.0722 * rgb[..., 2]
    height = image.shape[0]
    ramp = np.linspace(0.0, 1.0, height).reshape(-1, 1)
    return 0.6 * (luma / 255.0) + 0.4 * ramp


def _load_dpt(model_id: str, device: str) -> Estimator:
    try:
        import torch
        from transformers import AutoImageProcessor, AutoModelForDepthEstimation
    except ImportError as e:
        raise ModelLoadError(
            f"transformers/torch are required for model {model_id!r}; "
            f"install the [dpt] extra ({e})"
        ) from e
    try:
        processor = AutoImageProcessor.from_pretrained(model_id)
        model = AutoModelForDepthEstimation.from_pretrained(model_id).to(device).eval()
    except Exception as e:  # hub/network/checkpoint errors are all fatal here
        raise ModelLoadError(f"could not load depth model {model_id!r}: {e}") from e

    def estimate(image: np.ndarray) -> np.ndarray:
        inputs = processor(images=Image.fromarray(image), return_tensors="pt").to(device)
        with torch.no_grad():
            depth = model(**inputs).predicted_depth
        resized = torch.nn.functional.interpolate(
            depth.unsqueeze(1),
            size=image.shape[:2],
            mode="bicubic",
            align_corners=False,
        )
        return resized.squeeze().cpu().numpy().astype(np.float64)

    return estimate


def load_estimator(model_id: str, device: str = "cpu") -> Estimator:
    """Resolve a model id to an estimator; raises ModelLoadError if it can't."""
    if model_id == "luma":
        return luma_depth
    return _load_dpt(model_id, device)


def _scan_images(images_dir: Path) -> list[tuple[str, Path]]:
    out = []
    for path in sorted(images_dir.rglob("*")):
        if path.is_file() and path.suffix.lower() in IMAGE_EXTS:
            rel = path.relative_to(images_dir).as_posix()
            out.append((rel[: -len(path.suffix)], path))
    return out


def export_depth_png16(depth: np.ndarray, path: Path) -> None:
    """Min-max scale raw depth to [0, 65535] and write a 16-bit gray PNG."""
    depth = np.asarray(depth, dtype=np.float64)
    lo = float(depth.min())
    hi = float(depth.max())
    if hi == lo:
        scaled = np.zeros(depth.shape, dtype=np.uint16)
    else:
        scaled = ((depth - lo) / (hi - lo) * 65535.0).astype(np.uint16)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(scaled).save(path, format="PNG")


def estimate_depths(config: HelperConfig, estimator: Estimator | None = None) -> Summary:
    """Run the estimator over every image and export depth PNGs.

    The model is resolved before any image is touched, so an unloadable
    model fails the run up front. Per-image failures are collected, not
    fatal.
    """
    if estimator is None:
        estimator = load_estimator(config.model_id, config.device)
    if not config.images_dir.is_dir():
        raise ModelLoadError(f"images directory does not exist: {config.images_dir}")

    images = _scan_images(config.images_dir)
    summary = Summary(count=len(images))
    config.out_dir.mkdir(parents=True, exist_ok=True)
    for stem, path in images:
        try:
            with Image.open(path) as img:
                rgb = np.asarray(img.convert("RGB"))
            depth = np.asarray(estimator(rgb), dtype=np.float64)
            if depth.shape != rgb.shape[:2]:
                raise ValueError(
                    f"estimator returned shape {depth.shape}, expected {rgb.shape[:2]}"
                )
            if not np.isfinite(depth).all():
                raise ValueError("estimator returned non-finite depth values")
            out_path = config.out_dir / f"{stem}.png"
            export_depth_png16(depth, out_path)
            summary.written.append(stem)
        except (OSError, UnidentifiedImageError, ValueError) as e:
            log.warning("depth estimation failed for %s: %s", path, e)
            summary.failures.append((stem, f"{type(e).__name__}: {e}"))
    return summary
