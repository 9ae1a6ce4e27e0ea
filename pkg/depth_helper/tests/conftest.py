from pathlib import Path

import numpy as np
from PIL import Image


def make_images(root: Path, n: int = 5, size: tuple[int, int] = (48, 32)) -> Path:
    """Write n small distinct RGB photos (gradients + blocks) as JPEGs."""
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    w, h = size
    yy, xx = np.mgrid[0:h, 0:w]
    for i in range(n):
        r = ((xx * (i + 1) * 7) % 256).astype(np.uint8)
        g = ((yy * (i + 2) * 5) % 256).astype(np.uint8)
        b = np.full((h, w), (i * 40) % 256, dtype=np.uint8)
        Image.fromarray(np.stack([r, g, b], axis=-1)).save(images / f"sample_{i:02d}.jpg")
    return images
