import io
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable


def write_png16(path: Path, values: np.ndarray) -> None:
    """Test fixture writer for 16-bit grayscale depth PNGs."""
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(values.astype(np.uint16)).save(path, format="PNG")


def tiny_image_bytes() -> bytes:
    """A minimal real JPEG, reused for every fixture image."""
    buf = io.BytesIO()
    Image.new("RGB", (4, 4), (90, 120, 40)).save(buf, format="JPEG")
    return buf.getvalue()


def random_depth_u16(rng: np.random.Generator, height: int = 24, width: int = 32) -> np.ndarray:
    return rng.integers(0, 65536, size=(height, width), dtype=np.uint16)


def build_pair_dirs(root: Path, stems: list[str], seed: int = 0,
                    height: int = 24, width: int = 32) -> tuple[Path, Path]:
    """Create images/ and depths/ with matching stems (nested stems allowed)."""
    images = root / "images"
    depths = root / "depths"
    rng = np.random.default_rng(seed)
    jpeg = tiny_image_bytes()
    for stem in stems:
        img_path = images / f"{stem}.jpg"
        img_path.parent.mkdir(parents=True, exist_ok=True)
        img_path.write_bytes(jpeg)
        write_png16(depths / f"{stem}.png", random_depth_u16(rng, height, width))
    return images, depths


@pytest.fixture
def pair_dirs(tmp_path):
    return build_pair_dirs(tmp_path, [f"img_{i:03d}" for i in range(6)], seed=7)
