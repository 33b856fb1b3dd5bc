"""Render frame-index walks into pixel sequences, smoothing cuts by
cross-fading or by inserting interpolated intermediate frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, InvalidN
from .frameio import FrameSequence, validate_frame
from .preprocess import round_half_up
from .synthesis import CUT, FrameIndexSequence

MODE_CUT = "cut"
MODE_CROSSFADE = "crossfade"
MODE_INTERPOLATE = "interpolate"
TRANSITION_MODES = (MODE_CUT, MODE_CROSSFADE, MODE_INTERPOLATE)

DEFAULT_STEPS = 4


@dataclass(frozen=True)
class TransitionPlan:
    """How to treat cut transitions: hard cut, or `steps` inserted blend frames."""

    mode: str = MODE_CUT
    steps: int = 0

    def __post_init__(self):
        if self.mode not in TRANSITION_MODES:
            raise ValueError(f"mode must be one of {TRANSITION_MODES}, got {self.mode!r}")
        if self.mode == MODE_CUT and self.steps != 0:
            raise ValueError("cut mode takes no blend steps")
        if self.mode != MODE_CUT and self.steps < 1:
            raise ValueError(f"{self.mode} mode needs steps >= 1, got {self.steps}")


def _check_pair(a: np.ndarray, b: np.ndarray):
    a = validate_frame(a)
    b = validate_frame(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    return a, b


def blend(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Opacity blend: (1 - alpha) of `a` plus alpha of `b`, rounded half-up.

    alpha=0 returns `a` bit-exactly and alpha=1 returns `b` bit-exactly.
    """
    a, b = _check_pair(a, b)
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mixed = (1.0 - alpha) * a.astype(np.float64) + alpha * b.astype(np.float64)
    return round_half_up(mixed).astype(np.uint8)


def intermediate_frames(a: np.ndarray, b: np.ndarray, n: int) -> list:
    """n interpolated frames marching from near `a` to exactly `b`.

    Frame i (1-based) has per-pixel value p + (1 - i/n) * (q - p), where q is
    the pixel of `a` and p the pixel of `b`; i = n reproduces `b` exactly.
    """
    a, b = _check_pair(a, b)
    if n < 1:
        raise InvalidN(f"need n >= 1 intermediate frames, got {n}")
    q = a.astype(np.float64)
    p = b.astype(np.float64)
    return [round_half_up(p + (1.0 - i / n) * (q - p)).astype(np.uint8) for i in range(1, n + 1)]


def _transition_frames(a: np.ndarray, b: np.ndarray, plan: TransitionPlan) -> list:
    if plan.mode == MODE_CUT:
        return []
    if plan.mode == MODE_CROSSFADE:
        # linear ramp with endpoints excluded; the endpoint frames themselves
        # already carry alpha 0 and 1
        return [blend(a, b, k / (plan.steps + 1)) for k in range(1, plan.steps + 1)]
    return intermediate_frames(a, b, plan.steps)


def render(
    seq: FrameIndexSequence,
    frames: FrameSequence,
    plan: TransitionPlan = TransitionPlan(),
    wrap: bool = False,
) -> FrameSequence:
    """Materialize an index walk into pixels, smoothing each cut per the plan.

    Consecutive indices are copied through unchanged; every cut transition gets
    `plan.steps` inserted blend frames, so the output length is
    len(seq) + steps * (number of cuts). With `wrap`, transition frames from
    the last index back to the first are appended so the sequence also repeats
    seamlessly when a player loops it.
    """
    n = len(frames)
    for i in seq.indices:
        if not (0 <= i < n):
            raise IndexOutOfRange(f"index {i} outside frames 0..{n - 1}")

    kinds = dict(seq.transitions)
    out = [frames.frame(seq.indices[0])]
    for t in range(len(seq) - 1):
        cur, nxt = seq.indices[t], seq.indices[t + 1]
        if kinds[t] == CUT:
            out.extend(_transition_frames(frames.frame(cur), frames.frame(nxt), plan))
        out.append(frames.frame(nxt))
    if wrap:
        out.extend(
            _transition_frames(frames.frame(seq.indices[-1]), frames.frame(seq.indices[0]), plan)
        )
    return frames.with_frames(np.stack(out), label_suffix="|render")
