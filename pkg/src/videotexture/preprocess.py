"""Time-lapse intensity normalization.

Lighting drift across a long clip (day-to-night timelapses) otherwise
dominates the frame distance metric. Bounds come from pooled luma
percentiles over the whole clip; the same linear stretch is then applied
to every channel of every frame, which keeps the progression linear
instead of reintroducing per-frame flicker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogram
from .frameio import FrameSequence, to_luma

DEFAULT_LOW_PCT = 0.01
DEFAULT_HIGH_PCT = 0.99


def round_half_up(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer with halves going up (not banker's rounding)."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


@dataclass(frozen=True)
class IntensityBounds:
    """Sample-value bounds for the linear stretch, with their percentiles."""

    v_min: float
    v_max: float
    low_pct: float = DEFAULT_LOW_PCT
    high_pct: float = DEFAULT_HIGH_PCT

    def __post_init__(self):
        if not (0.0 <= self.low_pct < self.high_pct <= 1.0):
            raise ValueError(
                f"need 0 <= low_pct < high_pct <= 1, got ({self.low_pct}, {self.high_pct})"
            )
        if not (0.0 <= self.v_min < self.v_max <= 255.0):
            raise ValueError(f"need 0 <= v_min < v_max <= 255, got ({self.v_min}, {self.v_max})")


def compute_bounds(
    seq: FrameSequence,
    low_pct: float = DEFAULT_LOW_PCT,
    high_pct: float = DEFAULT_HIGH_PCT,
) -> IntensityBounds:
    """Percentile bounds of the pooled luma distribution across all frames.

    The quantile at fraction p is sorted_samples[floor(p * (N - 1))].
    """
    if not (0.0 <= low_pct < high_pct <= 1.0):
        raise ValueError(f"need 0 <= low_pct < high_pct <= 1, got ({low_pct}, {high_pct})")
    pooled = np.sort(to_luma(seq.frames).ravel())
    n = pooled.size
    v_min = float(pooled[int(low_pct * (n - 1))])
    v_max = float(pooled[int(high_pct * (n - 1))])
    if v_min >= v_max:
        raise DegenerateHistogram(
            f"luma percentiles coincide (v_min == v_max == {v_min}); clip has no usable range"
        )
    return IntensityBounds(v_min=v_min, v_max=v_max, low_pct=low_pct, high_pct=high_pct)


def normalize_intensity(seq: FrameSequence, bounds: IntensityBounds) -> FrameSequence:
    """Stretch sample intensities linearly onto [0, 255].

    Per sample x: x <= v_min -> 0; x >= v_max -> 255; otherwise
    255 * (x - v_min) / (v_max - v_min), rounded half-up. The same bounds are
    applied to every channel of every frame.
    """
    x = seq.frames.astype(np.float64)
    span = bounds.v_max - bounds.v_min
    stretched = round_half_up(255.0 * (x - bounds.v_min) / span)
    out = np.where(x <= bounds.v_min, 0.0, np.where(x >= bounds.v_max, 255.0, stretched))
    return seq.with_frames(out.astype(np.uint8), label_suffix="|normalized")
