"""Domain types, deterministic randomness, and the depth-to-motion math.

A normalized depth map is turned into a two-channel motion field in three
stages, applied independently per axis:

    reverse:  m' = 2*delta*(1 - d) + 2*(1 - delta)*d - 1     (delta in {0,1})
    shift:    m'' = m' + epsilon                             (epsilon in [-1,1])
    scale:    m''' = eta * m''                               (eta in [0,1])

All motion math runs in float32 (the interchange precision of the flow
ecosystem); depth normalization runs in float64 before casting down, so
near-constant inputs do not cancel catastrophically.

Randomness is fully pinned: per-sample seeds come from FNV-1a 64 over
(global seed bytes || sample id), parameter draws come from SplitMix64
with a fixed draw order and a fixed 53-bit uint-to-float conversion.
Identical seeds produce bit-identical parameters on every platform.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SM64_GAMMA = 0x9E3779B97F4A7C15
_TWO53 = float(1 << 53)

# Slack for float32 rounding when checking stage range invariants.
RANGE_TOL = 1e-6


class InvalidInputError(ValueError):
    """Pixel data violates a contract (non-finite depth, NaN motion)."""


class Stage(Enum):
    """Which transform a motion field has last been through."""

    REVERSED = "reversed"
    SHIFTED = "shifted"
    SCALED = "scaled"
    UNIT_NORMALIZED = "unit_normalized"


@dataclass
class RawDepthMap:
    """Model-native depth values, unbounded, one per pixel (float64, HxW)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise InvalidInputError(
                f"depth map must be 2-D (height, width), got shape {self.values.shape}"
            )
        if self.values.size == 0:
            raise InvalidInputError("depth map must contain at least one pixel")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass
class DepthMap:
    """Depth normalized to [0, 1] (float32, HxW).

    For a non-constant source the minimum is exactly 0 and the maximum
    exactly 1. A constant source normalizes to all zeros and is marked
    `degenerate` (it carries no motion signal).
    """

    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2 or self.values.size == 0:
            raise InvalidInputError(
                f"depth map must be non-empty and 2-D, got shape {self.values.shape}"
            )

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class AxisParams:
    """Sampled randomness for one motion axis.

    delta: value-reverse switch in {0, 1}
    epsilon: additive shift in [-1, 1]
    eta: multiplicative scale in [0, 1]
    """

    delta: int
    epsilon: float
    eta: float

    def __post_init__(self):
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 or 1, got {self.delta!r}")
        if not -1.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [-1, 1], got {self.epsilon!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta!r}")

    def to_dict(self) -> dict:
        return {"delta": self.delta, "epsilon": self.epsilon, "eta": self.eta}

    @staticmethod
    def from_dict(d: dict) -> "AxisParams":
        return AxisParams(int(d["delta"]), float(d["epsilon"]), float(d["eta"]))


@dataclass(frozen=True)
class AugmentationParams:
    """Per-axis augmentation parameters; x and y are drawn independently."""

    x: AxisParams
    y: AxisParams

    def to_dict(self) -> dict:
        return {"x": self.x.to_dict(), "y": self.y.to_dict()}

    @staticmethod
    def from_dict(d: dict) -> "AugmentationParams":
        return AugmentationParams(AxisParams.from_dict(d["x"]), AxisParams.from_dict(d["y"]))


@dataclass
class MotionField:
    """Two-channel per-pixel motion (float32 u and v, HxW) tagged with its stage."""

    u: np.ndarray
    v: np.ndarray
    stage: Stage
    degenerate: bool = False

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float32)
        self.v = np.asarray(self.v, dtype=np.float32)
        if self.u.ndim != 2 or self.u.size == 0:
            raise InvalidInputError(f"motion channels must be non-empty 2-D, got {self.u.shape}")
        if self.u.shape != self.v.shape:
            raise InvalidInputError(
                f"u and v shapes differ: {self.u.shape} vs {self.v.shape}"
            )

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    def max_norm(self) -> float:
        """Largest per-pixel Euclidean norm, computed in float64."""
        u = self.u.astype(np.float64)
        v = self.v.astype(np.float64)
        return float(np.sqrt(u * u + v * v).max())

    def validate(self) -> None:
        """Check the per-stage range invariant; raises InvalidInputError."""
        if self.stage is Stage.REVERSED:
            bound, worst = 1.0, max(float(np.abs(self.u).max()), float(np.abs(self.v).max()))
        elif self.stage in (Stage.SHIFTED, Stage.SCALED):
            bound, worst = 2.0, max(float(np.abs(self.u).max()), float(np.abs(self.v).max()))
        else:
            bound, worst = 1.0, self.max_norm()
        if worst > bound + RANGE_TOL:
            raise InvalidInputError(
                f"stage {self.stage.value} exceeds its range: {worst} > {bound}"
            )


@dataclass(frozen=True)
class SampleSeed:
    """Reproducibility key: a run-global seed plus a per-sample identifier."""

    global_seed: int
    sample_id: str


class SplitMix64:
    """SplitMix64 generator; trivially portable and bit-reproducible.

    Floats are produced from the top 53 bits divided by 2**53, giving
    uniform values in [0, 1).
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _SM64_GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) / _TWO53


def derive_sample_seed(seed: SampleSeed) -> int:
    """FNV-1a 64 over (global_seed as 8 little-endian bytes || sample_id UTF-8).

    Pure and stable across platforms; the returned value seeds
    `sample_augmentation` for one sample.
    """
    if not seed.sample_id:
        raise ValueError("sample_id must be non-empty")
    payload = struct.pack("<Q", seed.global_seed & _MASK64) + seed.sample_id.encode("utf-8")
    h = _FNV_OFFSET
    for byte in payload:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def sample_augmentation(rng_seed: int, shared_reverse: bool = False) -> AugmentationParams:
    """Draw per-axis (delta, epsilon, eta) from a SplitMix64 stream.

    Draw order is fixed and part of the contract: x.delta, x.epsilon,
    x.eta, y.delta, y.epsilon, y.eta. delta is the low bit of a raw
    output; epsilon is 2r - 1 and eta is r, with r the 53-bit uniform.

    With shared_reverse the y axis reuses x's reverse switch (the same
    six draws happen, so epsilon and eta are unchanged by the flag).
    """
    rng = SplitMix64(rng_seed)

    def draw_axis() -> AxisParams:
        delta = int(rng.next_u64() & 1)
        epsilon = 2.0 * rng.next_float() - 1.0
        eta = rng.next_float()
        return AxisParams(delta, epsilon, eta)

    x = draw_axis()
    y = draw_axis()
    if shared_reverse:
        y = AxisParams(x.delta, y.epsilon, y.eta)
    return AugmentationParams(x, y)


def normalize_depth(raw: RawDepthMap) -> DepthMap:
    """Min-max normalize a raw depth map to [0, 1].

    A constant input would divide by zero; it returns an all-zero map
    flagged degenerate instead, with a warning, so batch runs survive
    pathological inputs.
    """
    vals = raw.values
    finite = np.isfinite(vals)
    if not finite.all():
        idx = int(np.flatnonzero(~finite)[0])
        raise InvalidInputError(f"non-finite depth value at pixel index {idx}")
    lo = float(vals.min())
    hi = float(vals.max())
    if hi == lo:
        log.warning("constant depth map (value %g): normalizing to all zeros", lo)
        return DepthMap(np.zeros(vals.shape, dtype=np.float32), degenerate=True)
    return DepthMap(((vals - lo) / (hi - lo)).astype(np.float32))


def reverse_map(d: DepthMap, delta: int) -> np.ndarray:
    """Map depth [0,1] to motion [-1,1], optionally value-reversed.

    delta=0 gives 2d - 1 (near stays near); delta=1 gives 1 - 2d, the
    pixelwise negation of the delta=0 output.
    """
    if delta not in (0, 1):
        raise ValueError(f"delta must be 0 or 1, got {delta!r}")
    if delta:
        return (1.0 - d.values) * 2.0 - 1.0
    return d.values * 2.0 - 1.0


def shift_map(m: np.ndarray, epsilon: float) -> np.ndarray:
    """Add a constant shift; [-1,1] input stays within [-2,2]."""
    if not -1.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [-1, 1], got {epsilon!r}")
    return np.asarray(m, dtype=np.float32) + epsilon


def scale_map(m: np.ndarray, eta: float) -> np.ndarray:
    """Scale toward zero; [-2,2] input stays within [-2,2]."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta!r}")
    return np.asarray(m, dtype=np.float32) * eta


def depth_to_motion(d: DepthMap, params: AugmentationParams) -> MotionField:
    """Run the full reverse -> shift -> scale chain on both axes."""
    u = scale_map(shift_map(reverse_map(d, params.x.delta), params.x.epsilon), params.x.eta)
    v = scale_map(shift_map(reverse_map(d, params.y.delta), params.y.epsilon), params.y.eta)
    return MotionField(u, v, Stage.SCALED)


def zero_motion(height: int, width: int) -> MotionField:
    """All-zero scaled field; the motion of a degenerate (constant) depth."""
    z = np.zeros((height, width), dtype=np.float32)
    return MotionField(z, z.copy(), Stage.SCALED, degenerate=True)
