"""Motion-field rendering: max-norm normalization and UV-to-RGB mapping.

The colorizer is the standard Middlebury flow color wheel: 55 colors over
six hue segments (RY 15, YG 6, GC 4, CB 11, BM 13, MR 6), hue encoding
direction and saturation encoding magnitude, with zero motion rendered
pure white. Interpolation and quantization follow the classic colorizer
exactly (floor(255*c)), so output can be checked pixel-for-pixel against
reference implementations.

Colorization math runs in float64 regardless of the field's float32
storage, which keeps the rendering byte-stable under global rescaling of
the input field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, DepthMap, MotionField, Stage

SEGMENT_LENGTHS = (15, 6, 4, 11, 13, 6)  # RY, YG, GC, CB, BM, MR

DEGENERATE_NORM = 1e-8


@dataclass(frozen=True)
class ColorWheel:
    """Ordered wheel of 55 RGB triples, 8 bits per channel."""

    colors: np.ndarray

    def __len__(self) -> int:
        return self.colors.shape[0]


@dataclass
class FlowImage:
    """8-bit RGB rendering of a motion field (uint8, HxWx3)."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise InvalidInputError(f"flow image must be HxWx3, got {self.pixels.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def build_color_wheel() -> ColorWheel:
    """Construct the 55-color wheel; each segment ramps linearly."""
    ry, yg, gc, cb, bm, mr = SEGMENT_LENGTHS
    n = sum(SEGMENT_LENGTHS)
    w = np.zeros((n, 3), dtype=np.float64)
    col = 0
    w[col : col + ry, 0] = 255
    w[col : col + ry, 1] = np.floor(255 * np.arange(ry) / ry)
    col += ry
    w[col : col + yg, 0] = 255 - np.floor(255 * np.arange(yg) / yg)
    w[col : col + yg, 1] = 255
    col += yg
    w[col : col + gc, 1] = 255
    w[col : col + gc, 2] = np.floor(255 * np.arange(gc) / gc)
    col += gc
    w[col : col + cb, 1] = 255 - np.floor(255 * np.arange(cb) / cb)
    w[col : col + cb, 2] = 255
    col += cb
    w[col : col + bm, 2] = 255
    w[col : col + bm, 0] = np.floor(255 * np.arange(bm) / bm)
    col += bm
    w[col : col + mr, 2] = 255 - np.floor(255 * np.arange(mr) / mr)
    w[col : col + mr, 0] = 255
    return ColorWheel(w.astype(np.uint8))


_WHEEL: ColorWheel | None = None


def _wheel() -> ColorWheel:
    global _WHEEL
    if _WHEEL is None:
        _WHEEL = build_color_wheel()
    return _WHEEL


def unit_normalize(m: MotionField) -> MotionField:
    """Divide every pixel by the field's maximum Euclidean norm.

    An (effectively) all-zero field cannot be normalized; it comes back
    as zeros with the degenerate flag set, which downstream renders as
    pure white. eta=0 draws make this a legitimate outcome, not an error.
    """
    u = m.u.astype(np.float64)
    v = m.v.astype(np.float64)
    maxn = float(np.sqrt(u * u + v * v).max())
    if not np.isfinite(maxn):
        raise InvalidInputError("non-finite motion values cannot be normalized")
    if maxn < DEGENERATE_NORM:
        z = np.zeros(m.u.shape, dtype=np.float32)
        return MotionField(z, z.copy(), Stage.UNIT_NORMALIZED, degenerate=True)
    return MotionField(
        (u / maxn).astype(np.float32),
        (v / maxn).astype(np.float32),
        Stage.UNIT_NORMALIZED,
        degenerate=False,
    )


def flow_to_color(m: MotionField, wheel: ColorWheel | None = None) -> FlowImage:
    """Render a unit-normalized motion field through the color wheel.

    Per pixel: radius r = sqrt(u^2 + v^2), angle a = atan2(-v, -u)/pi,
    fractional wheel index fk = (a+1)/2 * (ncols-1), linear interpolation
    between adjacent wheel colors (index 54 wraps to 0). Channels in
    [0,1] are then pulled toward white by 1 - r*(1-c) for r <= 1, or
    dimmed to 0.75*c beyond the unit radius (only reachable when callers
    feed raw, un-normalized fields). Output is floor(255*c).
    """
    if wheel is None:
        wheel = _wheel()
    u = m.u.astype(np.float64)
    v = m.v.astype(np.float64)
    bad = ~(np.isfinite(u) & np.isfinite(v))
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise InvalidInputError(f"non-finite motion value at pixel index {idx}")

    # The arithmetic below is the classic colorizer formula evaluated
    # with in-place float64 ops in the same order, so results stay
    # bit-identical to a straightforward transcription while touching
    # far less memory.
    ncols = len(wheel)
    rad = np.sqrt(u * u + v * v)
    fk = np.arctan2(-v, -u)
    fk /= np.pi                  # a = atan2(-v, -u) / pi
    fk += 1.0
    fk /= 2.0
    fk *= ncols - 1              # fk = (a + 1) / 2 * (ncols - 1)
    k0f = np.floor(fk)
    k0 = k0f.astype(np.int64)
    k1 = k0 + 1
    k1[k1 == ncols] = 0
    f = fk
    f -= k0f                     # interpolation weight within the slot

    cols = wheel.colors.astype(np.float64) / 255.0
    c0 = cols[k0]
    c0 *= (1.0 - f)[..., None]
    c1 = cols[k1]
    c1 *= f[..., None]
    c0 += c1                     # c0 now holds the interpolated color

    over = rad > 1.0
    dimmed = 0.75 * c0[over] if over.any() else None
    out = 1.0 - c0               # 1 - r*(1-c), reusing buffers
    out *= rad[..., None]
    np.subtract(1.0, out, out=out)
    if dimmed is not None:
        out[over] = dimmed
    out *= 255.0
    np.floor(out, out=out)
    return FlowImage(out.astype(np.uint8))


def render_flow(m: MotionField) -> FlowImage:
    """Full rendering: max-norm normalize, then colorize.

    Invariant under positive global scaling of the field; a degenerate
    (zero) field renders all white.
    """
    return flow_to_color(unit_normalize(m), _wheel())


def depth_to_gray(d: DepthMap) -> np.ndarray:
    """8-bit grayscale preview of a normalized depth map."""
    return np.rint(d.values.astype(np.float64) * 255.0).astype(np.uint8)


def channel_to_gray(channel: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """8-bit grayscale preview of one motion channel, mapping [lo,hi] to [0,255]."""
    if hi <= lo:
        raise ValueError(f"need hi > lo, got [{lo}, {hi}]")
    scaled = (np.asarray(channel, dtype=np.float64) - lo) / (hi - lo)
    return np.rint(np.clip(scaled, 0.0, 1.0) * 255.0).astype(np.uint8)
