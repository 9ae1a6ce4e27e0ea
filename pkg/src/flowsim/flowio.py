"""File codecs: 16-bit depth PNG, grayscale PFM, Middlebury .flo, RGB PNG.

Layouts are explicit about endianness so files are identical across
hosts. Every malformed-input mode surfaces as FormatError (or its
subclass TruncatedFileError) instead of crashing; missing files raise
the usual OSError family.

Depth PNG semantics: whether a larger pixel value means nearer or
farther is depth-model-dependent. Values are treated as affine depth;
min-max normalization plus the random value reverse downstream absorb
the orientation, so either convention works.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import InvalidInputError, MotionField, RawDepthMap, Stage

FLO_MAGIC = 202021.25
FLO_MAGIC_BYTES = struct.pack("<f", FLO_MAGIC)  # b"PIEH"

# Pillow modes that carry single-channel 16-bit samples.
_PNG16_MODES = ("I;16", "I;16B", "I;16L", "I")


class FormatError(ValueError):
    """File content does not match the expected format."""


class TruncatedFileError(FormatError):
    """File ends before the declared payload is complete."""


def read_depth_png16(path) -> RawDepthMap:
    """Read a single-channel 16-bit PNG; pixel k becomes depth k/65535."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            fmt, mode = img.format, img.mode
            arr = np.asarray(img)
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: not a readable image: {e}") from e
    except OSError as e:
        raise FormatError(f"{path}: corrupt PNG: {e}") from e
    if fmt != "PNG":
        raise FormatError(f"{path}: expected PNG, found {fmt or 'unknown format'}")
    if mode not in _PNG16_MODES or arr.ndim != 2:
        raise FormatError(
            f"{path}: expected single-channel 16-bit PNG, found mode {mode!r} "
            f"with array shape {arr.shape}"
        )
    return RawDepthMap(arr.astype(np.float64) / 65535.0)


def write_depth_png16(values: np.ndarray, path) -> None:
    """Write a uint16 HxW array as a single-channel 16-bit PNG."""
    arr = np.asarray(values)
    if arr.dtype != np.uint16 or arr.ndim != 2:
        raise ValueError(f"expected uint16 HxW array, got {arr.dtype} {arr.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")


def read_depth_pfm(path) -> RawDepthMap:
    """Read a grayscale PFM ("Pf") file.

    The scale line's sign selects endianness (negative = little-endian);
    its magnitude is ignored, as is conventional. PFM stores rows
    bottom-up; the result is flipped to top-down.
    """
    path = Path(path)
    data = path.read_bytes()

    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedFileError(f"{path}: PFM header ended after {len(tokens)} fields")
        tokens.append(data[start:pos])

    if tokens[0] != b"Pf":
        if tokens[0] == b"PF":
            raise FormatError(f'{path}: expected grayscale "Pf" PFM, found color "PF"')
        raise FormatError(f"{path}: not a PFM file (magic {tokens[0][:8]!r})")
    try:
        width, height = int(tokens[1]), int(tokens[2])
        scale = float(tokens[3])
    except ValueError as e:
        raise FormatError(f"{path}: malformed PFM header: {e}") from e
    if width < 1 or height < 1:
        raise FormatError(f"{path}: invalid PFM dimensions {width}x{height}")
    if scale == 0.0:
        raise FormatError(f"{path}: PFM scale must be non-zero")

    pos += 1  # exactly one whitespace byte separates header and payload
    need = width * height * 4
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise TruncatedFileError(
            f"{path}: PFM payload truncated: expected {need} bytes, found {len(payload)}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    arr = np.flipud(arr).astype(np.float64)
    if not np.isfinite(arr).all():
        idx = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise FormatError(f"{path}: non-finite PFM value at pixel index {idx}")
    return RawDepthMap(arr)


def read_depth_auto(path) -> RawDepthMap:
    """Dispatch on suffix: .png -> 16-bit PNG reader, .pfm -> PFM reader."""
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return read_depth_png16(path)
    if suffix == ".pfm":
        return read_depth_pfm(path)
    raise FormatError(f"{path}: unsupported depth format {suffix!r} (use .png or .pfm)")


def encode_flo(m: MotionField) -> bytes:
    """Serialize a motion field to .flo bytes (magic, w, h, interleaved UV)."""
    u = m.u
    v = m.v
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        raise InvalidInputError("cannot write non-finite motion values to .flo")
    header = FLO_MAGIC_BYTES + struct.pack("<ii", m.width, m.height)
    data = np.empty((m.height, m.width, 2), dtype="<f4")
    data[..., 0] = u
    data[..., 1] = v
    return header + data.tobytes()


def write_flo(m: MotionField, path) -> None:
    """Write a motion field in the Middlebury .flo layout, bit-exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_flo(m))


def read_flo(path) -> MotionField:
    """Read a .flo file; exact inverse of write_flo."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12:
        raise TruncatedFileError(f"{path}: too short for a .flo header ({len(data)} bytes)")
    if data[:4] != FLO_MAGIC_BYTES:
        raise FormatError(f"{path}: not a .flo file (bad magic)")
    width, height = struct.unpack("<ii", data[4:12])
    if width < 1 or height < 1:
        raise FormatError(f"{path}: invalid .flo dimensions {width}x{height}")
    need = 12 + 8 * width * height
    if len(data) < need:
        raise TruncatedFileError(
            f"{path}: .flo truncated: expected {need} bytes, found {len(data)}"
        )
    if len(data) > need:
        raise FormatError(f"{path}: .flo has {len(data) - need} trailing bytes")
    arr = np.frombuffer(data[12:], dtype="<f4").reshape(height, width, 2)
    return MotionField(arr[..., 0].copy(), arr[..., 1].copy(), Stage.SCALED)


def encode_png_rgb(pixels: np.ndarray) -> bytes:
    """Encode an HxWx3 uint8 array as lossless RGB PNG bytes."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected HxWx3 uint8 pixels, got {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def write_png_rgb(pixels: np.ndarray, path) -> None:
    """Write an HxWx3 uint8 array as RGB PNG; reading back is pixel-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png_rgb(pixels))


def read_png_rgb(path) -> np.ndarray:
    """Read an 8-bit RGB PNG back into an HxWx3 uint8 array."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            fmt, mode = img.format, img.mode
            arr = np.asarray(img)
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: not a readable image: {e}") from e
    except OSError as e:
        raise FormatError(f"{path}: corrupt PNG: {e}") from e
    if fmt != "PNG" or mode != "RGB":
        raise FormatError(f"{path}: expected 8-bit RGB PNG, found {fmt}/{mode}")
    return arr


def write_png_gray8(values: np.ndarray, path) -> None:
    """Write a uint8 HxW array as an 8-bit grayscale PNG (previews)."""
    arr = np.asarray(values)
    if arr.dtype != np.uint8 or arr.ndim != 2:
        raise ValueError(f"expected uint8 HxW array, got {arr.dtype} {arr.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, mode="L").save(path, format="PNG")
