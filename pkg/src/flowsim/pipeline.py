"""Dataset factory: image/depth pairing, per-sample generation, manifest.

Every sample is processed independently from a seed derived purely from
(global_seed, sample_id), so the output bytes never depend on worker
count or scheduling. Parallelism is a process pool over samples; the
manifest is assembled single-writer after all workers finish, with
records in sorted sample_id order regardless of completion order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .core import (
    AugmentationParams,
    SampleSeed,
    depth_to_motion,
    derive_sample_seed,
    normalize_depth,
    sample_augmentation,
    zero_motion,
)
from .flowio import encode_flo, encode_png_rgb, read_depth_auto
from .flowviz import flow_to_color, unit_normalize

log = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"

# Matching preference when one stem has several candidate files.
IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".bmp", ".webp")
DEPTH_EXTS = (".png", ".pfm")

# Abort the run when more than this fraction of samples fails.
FAILURE_ABORT_FRACTION = 0.5


class ConfigurationError(ValueError):
    """The run is misconfigured (bad directories, no pairs, bad flags)."""


class PipelineError(RuntimeError):
    """The run itself failed (e.g. most samples errored)."""


@dataclass(frozen=True)
class DatasetConfig:
    """Everything a dataset run needs; immutable and shareable."""

    images_dir: Path
    depths_dir: Path
    output_dir: Path
    global_seed: int = 0
    emit_flo: bool = False
    emit_png: bool = True
    shared_reverse: bool = False
    jobs: int = 1
    variants: int = 1

    def __post_init__(self):
        object.__setattr__(self, "images_dir", Path(self.images_dir))
        object.__setattr__(self, "depths_dir", Path(self.depths_dir))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if not (self.emit_flo or self.emit_png):
            raise ConfigurationError("at least one of emit_flo, emit_png must be enabled")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")
        if self.variants < 1:
            raise ConfigurationError(f"variants must be >= 1, got {self.variants}")

    def to_dict(self) -> dict:
        return {
            "images_dir": str(self.images_dir),
            "depths_dir": str(self.depths_dir),
            "output_dir": str(self.output_dir),
            "global_seed": self.global_seed,
            "emit_flo": self.emit_flo,
            "emit_png": self.emit_png,
            "shared_reverse": self.shared_reverse,
            "jobs": self.jobs,
            "variants": self.variants,
        }


@dataclass
class SampleRecord:
    """Everything needed to audit or regenerate one sample."""

    sample_id: str
    image_path: str
    depth_path: str
    flow_png_path: str | None
    flo_path: str | None
    params: AugmentationParams
    degenerate: bool
    checksum: str | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "image_path": self.image_path,
            "depth_path": self.depth_path,
            "flow_png_path": self.flow_png_path,
            "flo_path": self.flo_path,
            "params": self.params.to_dict(),
            "degenerate": self.degenerate,
            "checksum": self.checksum,
            "error": self.error,
        }


@dataclass
class MatchResult:
    pairs: list[tuple[str, Path, Path]]
    unmatched_images: list[str]
    unmatched_depths: list[str]


@dataclass
class DatasetManifest:
    """Reproducibility ledger for one run."""

    config: DatasetConfig
    records: list[SampleRecord]
    unmatched_images: list[str]
    unmatched_depths: list[str]
    matched_pairs: int
    tool_version: str
    created_at: str
    wall_time_s: float

    @property
    def succeeded(self) -> int:
        return sum(1 for r in self.records if r.error is None)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if r.error is not None)

    @property
    def degenerate_count(self) -> int:
        return sum(1 for r in self.records if r.degenerate)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "wall_time_s": self.wall_time_s,
            "config": self.config.to_dict(),
            "matched_pairs": self.matched_pairs,
            "counts": {
                "records": len(self.records),
                "succeeded": self.succeeded,
                "failed": self.failed,
                "degenerate": self.degenerate_count,
            },
            "unmatched_images": self.unmatched_images,
            "unmatched_depths": self.unmatched_depths,
            "records": [r.to_dict() for r in self.records],
        }

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _scan(directory: Path, exts: tuple[str, ...]) -> dict[str, Path]:
    """Recursively collect files by relative stem, preferring earlier exts."""
    rank = {ext: i for i, ext in enumerate(exts)}
    found: dict[str, Path] = {}
    for path in sorted(directory.rglob("*")):
        if not path.is_file():
            continue
        ext = path.suffix.lower()
        if ext not in rank:
            continue
        rel = path.relative_to(directory).as_posix()
        stem = rel[: -len(path.suffix)]
        prev = found.get(stem)
        if prev is None:
            found[stem] = path
        elif rank[ext] < rank[prev.suffix.lower()]:
            log.warning("duplicate stem %r: using %s over %s", stem, path.name, prev.name)
            found[stem] = path
        else:
            log.warning("duplicate stem %r: keeping %s, ignoring %s", stem, prev.name, path.name)
    return found


def match_pairs(images_dir, depths_dir) -> MatchResult:
    """Pair images with depth maps by relative file stem (case-sensitive).

    Pairs come back sorted by sample_id. Files without a partner are
    reported (logged and returned), never silently dropped; an empty
    intersection is a configuration error.
    """
    images_dir = Path(images_dir)
    depths_dir = Path(depths_dir)
    if not images_dir.is_dir():
        raise ConfigurationError(f"images directory does not exist: {images_dir}")
    if not depths_dir.is_dir():
        raise ConfigurationError(f"depths directory does not exist: {depths_dir}")

    images = _scan(images_dir, IMAGE_EXTS)
    depths = _scan(depths_dir, DEPTH_EXTS)
    common = sorted(set(images) & set(depths))
    if not common:
        raise ConfigurationError(
            f"no matching stems between {images_dir} ({len(images)} images) "
            f"and {depths_dir} ({len(depths)} depth maps)"
        )
    unmatched_images = sorted(set(images) - set(depths))
    unmatched_depths = sorted(set(depths) - set(images))
    for stem in unmatched_images:
        log.warning("image without depth map, skipped: %s", images[stem])
    for stem in unmatched_depths:
        log.warning("depth map without image, skipped: %s", depths[stem])
    pairs = [(stem, images[stem], depths[stem]) for stem in common]
    return MatchResult(pairs, unmatched_images, unmatched_depths)


def generate_sample(image_path, depth_path, sample_id: str, config: DatasetConfig) -> SampleRecord:
    """Produce one sample: seed, params, depth -> motion -> outputs.

    The augmentation parameters depend only on (global_seed, sample_id),
    so they are recorded even when the depth file turns out unreadable.
    A constant depth map carries no motion signal and yields the zero
    field (rendered all white) with degenerate=True. Failures come back
    as a record with `error` set rather than raising.
    """
    seed_value = derive_sample_seed(SampleSeed(config.global_seed, sample_id))
    params = sample_augmentation(seed_value, shared_reverse=config.shared_reverse)
    record = SampleRecord(
        sample_id=sample_id,
        image_path=str(image_path),
        depth_path=str(depth_path),
        flow_png_path=None,
        flo_path=None,
        params=params,
        degenerate=False,
        checksum=None,
    )
    try:
        raw = read_depth_auto(depth_path)
        depth = normalize_depth(raw)
        if depth.degenerate:
            motion = zero_motion(depth.height, depth.width)
        else:
            motion = depth_to_motion(depth, params)
        normalized = unit_normalize(motion)
        record.degenerate = depth.degenerate or normalized.degenerate

        hasher = hashlib.blake2b(digest_size=8)
        if config.emit_png:
            png_bytes = encode_png_rgb(flow_to_color(normalized).pixels)
            rel = f"flow_png/{sample_id}.png"
            out = config.output_dir / rel
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_bytes(png_bytes)
            hasher.update(png_bytes)
            record.flow_png_path = rel
        if config.emit_flo:
            flo_bytes = encode_flo(motion)
            rel = f"flo/{sample_id}.flo"
            out = config.output_dir / rel
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_bytes(flo_bytes)
            hasher.update(flo_bytes)
            record.flo_path = rel
        record.checksum = hasher.hexdigest()
    except (ValueError, OSError) as e:
        record.error = f"{type(e).__name__}: {e}"
        record.flow_png_path = None
        record.flo_path = None
        record.checksum = None
    return record


def _worker(task: tuple[str, str, str, DatasetConfig]) -> SampleRecord:
    sample_id, image_path, depth_path, config = task
    return generate_sample(image_path, depth_path, sample_id, config)


def _failure_summary(records: list[SampleRecord]) -> str:
    classes: dict[str, int] = {}
    for r in records:
        if r.error is not None:
            cls = r.error.split(":", 1)[0]
            classes[cls] = classes.get(cls, 0) + 1
    return ", ".join(f"{cls} x{n}" for cls, n in sorted(classes.items()))


def run_dataset(config: DatasetConfig) -> DatasetManifest:
    """Process every matched pair and write `<output_dir>/manifest.json`.

    Individual corrupt samples are recorded, not fatal; the run aborts
    only when more than half of all samples fail.
    """
    t0 = time.monotonic()
    match = match_pairs(config.images_dir, config.depths_dir)

    tasks: list[tuple[str, str, str, DatasetConfig]] = []
    for stem, image_path, depth_path in match.pairs:
        if config.variants == 1:
            tasks.append((stem, str(image_path), str(depth_path), config))
        else:
            for i in range(config.variants):
                tasks.append((f"{stem}_v{i}", str(image_path), str(depth_path), config))

    config.output_dir.mkdir(parents=True, exist_ok=True)
    if config.jobs == 1:
        records = [_worker(task) for task in tasks]
    else:
        chunksize = max(1, len(tasks) // (config.jobs * 8))
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_worker, tasks, chunksize=chunksize))

    records.sort(key=lambda r: r.sample_id)
    ids = [r.sample_id for r in records]
    if len(set(ids)) != len(ids):
        raise PipelineError("internal error: duplicate sample ids in manifest")

    failed = [r for r in records if r.error is not None]
    if failed and len(failed) > FAILURE_ABORT_FRACTION * len(records):
        raise PipelineError(
            f"{len(failed)}/{len(records)} samples failed ({_failure_summary(records)})"
        )
    for r in failed:
        log.warning("sample %s failed: %s", r.sample_id, r.error)

    manifest = DatasetManifest(
        config=config,
        records=records,
        unmatched_images=match.unmatched_images,
        unmatched_depths=match.unmatched_depths,
        matched_pairs=len(match.pairs),
        tool_version=TOOL_VERSION,
        created_at=datetime.now(timezone.utc).isoformat(),
        wall_time_s=round(time.monotonic() - t0, 3),
    )
    manifest.save(config.output_dir / "manifest.json")
    log.info(
        "dataset complete: %d records (%d failed, %d degenerate) in %.2fs",
        len(records),
        manifest.failed,
        manifest.degenerate_count,
        manifest.wall_time_s,
    )
    return manifest


def simulate_video_flows(frames_dir, depths_dir, config: DatasetConfig) -> DatasetManifest:
    """Dataset run over extracted video frames.

    Frames live in per-sequence subdirectories, so sample ids carry the
    sequence name (e.g. "walk/00001") and every frame of a video draws
    its own augmentation. Identical sample ids produce identical outputs
    in either mode; only the id construction differs.
    """
    cfg = dataclasses.replace(config, images_dir=Path(frames_dir), depths_dir=Path(depths_dir))
    return run_dataset(cfg)
