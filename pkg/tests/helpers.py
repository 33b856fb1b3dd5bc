"""Synthetic clip fixtures and small test utilities shared across the suite."""

import numpy as np
from PIL import Image

from videotexture import FrameSequence


def make_noise_seq(n=5, h=8, w=8, channels=3, seed=0, delay=40):
    """Random frames; the workhorse input for oracle comparisons."""
    rng = np.random.default_rng(seed)
    shape = (n, h, w) if channels == 1 else (n, h, w, channels)
    return FrameSequence(rng.integers(0, 256, shape, dtype=np.uint8), delay)


def make_pendulum(n_frames=40, period=20, h=48, w=64, radius=5.0, delay=40):
    """Grayscale swinging-dot clip; returns (sequence, per-frame x positions).

    Frames at mirrored phases look (near) identical even though the dot moves
    in opposite directions, which is exactly the ambiguity the dynamics filter
    is meant to resolve.
    """
    amp = w / 2 - 10
    ys, xs = np.mgrid[0:h, 0:w]
    frames = []
    positions = []
    for t in range(n_frames):
        x = w / 2 + amp * np.sin(2 * np.pi * t / period)
        positions.append(x)
        glow = 255.0 * np.exp(-((xs - x) ** 2 + (ys - h / 2) ** 2) / (2 * radius * radius))
        frames.append(np.floor(glow + 0.5).astype(np.uint8))
    return FrameSequence(np.stack(frames), delay), np.array(positions)


def make_periodic(period=12, repeats=3, h=16, w=16, seed=7, delay=40):
    """Exactly periodic clip: `period` distinct random frames tiled `repeats` times."""
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 256, (period, h, w, 3), dtype=np.uint8)
    return FrameSequence(np.tile(base, (repeats, 1, 1, 1)), delay)


def make_flag(n_frames=12, h=32, w=48, delay=40):
    """High-contrast waving-stripes clip; cuts between far-apart frames are harsh."""
    ys, xs = np.mgrid[0:h, 0:w]
    frames = []
    for t in range(n_frames):
        phase = 2 * np.pi * t / n_frames
        wave = np.sin(xs / 4.0 + phase + 0.5 * np.sin(ys / 6.0 + 2 * phase))
        frames.append(np.where(wave > 0, 255, 0).astype(np.uint8))
    return FrameSequence(np.stack(frames), delay)


def make_motion_clip(n_frames=100, h=120, w=160, period=25, delay=40):
    """Colorful exactly-periodic RGB clip for end-to-end runs.

    Drifting diagonal color bands plus an orbiting bright blob, both with the
    same period, so a seamless loop of `period` frames exists by construction
    and consecutive frames are always visibly distinct.
    """
    ys, xs = np.mgrid[0:h, 0:w]
    frames = []
    for t in range(n_frames):
        phase = 2 * np.pi * (t % period) / period
        r = 127.5 * (1 + np.sin(xs / 9.0 + phase))
        g = 127.5 * (1 + np.sin(ys / 7.0 - 2 * phase))
        b = 127.5 * (1 + np.sin((xs + ys) / 11.0 + 3 * phase))
        cx = w / 2 + (w / 3) * np.cos(phase)
        cy = h / 2 + (h / 3) * np.sin(phase)
        glow = 255.0 * np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * 12.0 ** 2))
        rgb = np.stack([np.maximum(r, glow), np.maximum(g, glow), np.maximum(b, glow)], axis=-1)
        frames.append(np.floor(rgb + 0.5).astype(np.uint8))
    return FrameSequence(np.stack(frames), delay)


def write_stills(seq, directory):
    """Dump a sequence as numbered PNG stills the loader can pick up."""
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        Image.fromarray(seq.frame(i)).save(directory / f"{i:04d}.png")
    return directory


def count_reversals(indices, crop_offset, positions):
    """Direction flips of the pendulum position along a played index walk."""
    p = positions[[i + crop_offset for i in indices]]
    deltas = np.diff(p)
    return int(np.sum(deltas[:-1] * deltas[1:] < 0))
