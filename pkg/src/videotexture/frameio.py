"""Clip decoding, animated GIF encoding and heatmap rendering.

Still input is PNG (lossless, so the similarity metrics see true pixel
values); animated input and output use the GIF container. Frames are kept
as uint8 numpy arrays, shape (h, w) for grayscale or (h, w, 3) for RGB,
stacked into a single (n, h, w[, 3]) array per clip.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageSequence, UnidentifiedImageError

from .errors import (
    DecodeFailure,
    DimensionMismatch,
    EncodeFailure,
    IoFailure,
    MissingInput,
    NonFiniteEntry,
    TooFewFrames,
)

logger = logging.getLogger(__name__)

#: delay used for still-image directories, which carry no timing metadata
DEFAULT_DELAY_MS = 100

#: Rec. 601 luma weights, shared by preprocessing and the wavelet descriptors
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

INPUT_KINDS = ("auto", "stills", "animation")


def validate_frame(frame: np.ndarray) -> np.ndarray:
    """Check a single frame is a uint8 grayscale or RGB array."""
    frame = np.asarray(frame)
    if frame.dtype != np.uint8:
        raise DimensionMismatch(f"frame dtype must be uint8, got {frame.dtype}")
    if frame.ndim == 2:
        return frame
    if frame.ndim == 3 and frame.shape[2] == 3:
        return frame
    raise DimensionMismatch(f"frame shape must be (h, w) or (h, w, 3), got {frame.shape}")


def to_luma(frame: np.ndarray) -> np.ndarray:
    """Convert one frame (or a stack of frames) to float64 luma values."""
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim >= 3 and arr.shape[-1] == 3:
        r, g, b = LUMA_WEIGHTS
        return arr[..., 0] * r + arr[..., 1] * g + arr[..., 2] * b
    return arr


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames plus timing metadata; the unit of ingestion and emission.

    `frames` has shape (n, h, w) or (n, h, w, 3), dtype uint8; all frames share
    the same dimensions by construction. The sequence is immutable after
    construction and safe to share across threads.
    """

    frames: np.ndarray
    frame_delay_ms: int = DEFAULT_DELAY_MS
    source_label: str = ""

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.dtype != np.uint8:
            raise DimensionMismatch(f"frames dtype must be uint8, got {frames.dtype}")
        if frames.ndim == 3:
            pass
        elif frames.ndim == 4 and frames.shape[3] == 3:
            pass
        else:
            raise DimensionMismatch(
                f"frames must have shape (n, h, w) or (n, h, w, 3), got {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise TooFewFrames("a frame sequence needs at least one frame")
        if self.frame_delay_ms <= 0:
            raise DimensionMismatch(f"frame_delay_ms must be positive, got {self.frame_delay_ms}")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return 1 if self.frames.ndim == 3 else 3

    def frame(self, i: int) -> np.ndarray:
        return self.frames[i]

    def with_frames(self, frames: np.ndarray, label_suffix: str = "") -> "FrameSequence":
        return FrameSequence(frames, self.frame_delay_ms, self.source_label + label_suffix)


def _image_to_array(img: Image.Image) -> np.ndarray:
    # Grayscale stays single-channel; everything else (P, RGBA, 16-bit...)
    # is canonicalized to RGB so a clip is uniformly 1- or 3-channel.
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    if img.mode == "1":
        return np.asarray(img.convert("L"), dtype=np.uint8)
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def _load_stills(path: Path) -> list[np.ndarray]:
    files = sorted(path.glob("*.png"))
    if not files:
        raise MissingInput(f"no *.png files found in {path}")
    frames = []
    for f in files:
        try:
            with Image.open(f) as img:
                frames.append(_image_to_array(img))
        except UnidentifiedImageError as exc:
            raise DecodeFailure(f"cannot decode {f}: {exc}") from exc
        except OSError as exc:
            raise DecodeFailure(f"cannot read {f}: {exc}") from exc
    return frames


def _load_animation(path: Path) -> tuple[list[np.ndarray], int]:
    try:
        with Image.open(path) as img:
            delay = int(img.info.get("duration") or DEFAULT_DELAY_MS)
            frames = [_image_to_array(fr) for fr in ImageSequence.Iterator(img)]
    except UnidentifiedImageError as exc:
        raise DecodeFailure(f"cannot decode {path}: {exc}") from exc
    except OSError as exc:
        raise DecodeFailure(f"cannot read {path}: {exc}") from exc
    return frames, max(delay, 1)


def load_frames(path, kind: str = "auto", delay_ms: int = DEFAULT_DELAY_MS) -> FrameSequence:
    """Decode a clip into a FrameSequence.

    `path` is either a directory of lexicographically ordered *.png stills or
    a single animated .gif file. `kind` forces one interpretation; "auto"
    picks by path type. `delay_ms` is used for stills, which carry no timing;
    animations keep their own stored delay.

    Heterogeneous frame sizes are rejected, never silently resized.
    """
    if kind not in INPUT_KINDS:
        raise ValueError(f"kind must be one of {INPUT_KINDS}, got {kind!r}")
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"input path does not exist: {path}")

    if kind == "auto":
        kind = "stills" if path.is_dir() else "animation"
    if kind == "stills":
        if not path.is_dir():
            raise MissingInput(f"stills input must be a directory: {path}")
        frames = _load_stills(path)
        delay = delay_ms
    else:
        if path.is_dir():
            raise MissingInput(f"animation input must be a file: {path}")
        frames, delay = _load_animation(path)

    if len(frames) < 2:
        raise TooFewFrames(f"need at least 2 frames for analysis, got {len(frames)} from {path}")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise DimensionMismatch(
                f"frame {i} has shape {f.shape}, expected {shape} (no silent resizing)"
            )
    logger.info("loaded %d frames of %sx%s from %s", len(frames), shape[1], shape[0], path)
    return FrameSequence(np.stack(frames), frame_delay_ms=delay, source_label=str(path))


def write_animation(seq: FrameSequence, path, loop_forever: bool = True) -> None:
    """Encode a FrameSequence as an animated GIF.

    Each RGB frame is palettized independently with median-cut quantization
    (GIF is limited to 256 colors per frame); grayscale frames map onto the
    gray palette losslessly. When `loop_forever` is set, the file carries an
    infinite loop count. Note the container stores delays in centiseconds and
    merges exactly identical consecutive frames, accumulating their delays.
    """
    path = Path(path)
    images = []
    try:
        for i in range(len(seq)):
            img = Image.fromarray(seq.frame(i))
            if img.mode == "RGB":
                img = img.quantize(colors=256, method=Image.Quantize.MEDIANCUT)
            images.append(img)
    except (ValueError, OSError) as exc:
        raise EncodeFailure(f"cannot encode frames: {exc}") from exc

    save_kwargs = dict(
        save_all=True,
        append_images=images[1:],
        duration=seq.frame_delay_ms,
        optimize=False,
    )
    if loop_forever:
        save_kwargs["loop"] = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        images[0].save(path, **save_kwargs)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %d-frame animation to %s", len(seq), path)


# Cold-to-hot color ramp used for all matrix heatmaps.
_HEAT_ANCHORS = np.array(
    [
        [0, 0, 128],     # coldest: navy
        [0, 192, 255],   # sky blue
        [255, 255, 64],  # yellow
        [160, 0, 0],     # hottest: dark red
    ],
    dtype=np.float64,
)


def heatmap_positions(matrix: np.ndarray) -> np.ndarray:
    """Color-scale position of every entry: 0 at the minimum, 1 at the maximum.

    Monotone in the entry values; a constant matrix sits entirely at 0 (cold).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise NonFiniteEntry(f"heatmap needs a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntry("matrix contains non-finite entries")
    lo, hi = m.min(), m.max()
    return np.zeros_like(m) if hi == lo else (m - lo) / (hi - lo)


def heatmap_rgb(matrix: np.ndarray, scale: int = 1) -> np.ndarray:
    """Map a real matrix to an RGB heatmap array.

    The minimum value maps to the coldest ramp color and the maximum to the
    hottest; `scale` is an integer pixel upscale factor.
    """
    if scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    t = heatmap_positions(matrix)

    # piecewise-linear interpolation along the anchor ramp
    pos = t * (len(_HEAT_ANCHORS) - 1)
    idx = np.minimum(pos.astype(int), len(_HEAT_ANCHORS) - 2)
    frac = (pos - idx)[..., None]
    rgb = _HEAT_ANCHORS[idx] * (1.0 - frac) + _HEAT_ANCHORS[idx + 1] * frac
    out = np.floor(rgb + 0.5).astype(np.uint8)
    if scale > 1:
        out = np.repeat(np.repeat(out, scale, axis=0), scale, axis=1)
    return out


def render_heatmap(matrix: np.ndarray, path, scale: int = 1) -> None:
    """Render a matrix heatmap to a PNG file."""
    rgb = heatmap_rgb(matrix, scale=scale)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(rgb).save(path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
