"""Frame-ordering synthesis: stochastic playback, seamless loop search and
cluster-guided walks over the transition model."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .analysis import STAGE_SHIFTED, DistanceMatrix, TransitionModel
from .errors import (
    DimensionMismatch,
    EmptyCluster,
    IndexOutOfRange,
    InsufficientClusters,
    NoFeasibleLoop,
)
from .wavelet import Clustering

logger = logging.getLogger(__name__)

CONSECUTIVE = "consecutive"
CUT = "cut"

DEFAULT_PRUNE_FRAC = 0.05


def default_min_loop(n: int) -> int:
    """Default minimum loop length for an n-frame analysis range."""
    return max(8, n // 10)


@dataclass(frozen=True)
class FrameIndexSequence:
    """An ordered frame-index walk with its transition annotations.

    `transitions` holds one (position, kind) pair per adjacent index pair;
    kind is "cut" exactly where indices[t+1] != indices[t] + 1.
    """

    indices: tuple
    transitions: tuple

    @classmethod
    def from_indices(cls, indices) -> "FrameIndexSequence":
        idx = tuple(int(i) for i in indices)
        trans = tuple(
            (t, CONSECUTIVE if idx[t + 1] == idx[t] + 1 else CUT) for t in range(len(idx) - 1)
        )
        return cls(indices=idx, transitions=trans)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def cut_positions(self) -> tuple:
        return tuple(t for t, kind in self.transitions if kind == CUT)

    def remapped(self, offset: int) -> "FrameIndexSequence":
        """Shift all indices by a crop offset back into original frame numbers."""
        return FrameIndexSequence.from_indices(i + offset for i in self.indices)

    def to_jsonable(self) -> dict:
        return {
            "indices": list(self.indices),
            "transitions": [[t, kind] for t, kind in self.transitions],
        }


@dataclass(frozen=True)
class Loop:
    """A seamless repeatable segment: play start..end, then jump back to start.

    `cut_cost` is the shifted-matrix entry (end, start): how dissimilar the
    loop's first frame is from what would naturally follow its last frame.
    """

    start: int
    end: int
    cut_cost: float

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"need 0 <= start < end, got ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def sample_next(model: TransitionModel, current: int, rng: np.random.Generator) -> int:
    """Draw the next frame index from row `current` of the model."""
    if not (0 <= current < model.rows):
        raise IndexOutOfRange(
            f"frame {current} has no outgoing distribution (rows 0..{model.rows - 1})"
        )
    row = model.probabilities[current]
    j = int(np.searchsorted(np.cumsum(row), rng.random(), side="right"))
    return min(j, model.cols - 1)


def close_chain(model: TransitionModel) -> TransitionModel:
    """Restrict a shifted-source model to frames that have outgoing rows.

    A model built from the shifted matrix has one more column than rows: its
    final frame can be reached but never left. Dropping that column and
    renormalizing yields a square chain every walk can iterate forever.
    """
    if model.is_square:
        return model
    if model.cols != model.rows + 1:
        raise DimensionMismatch(
            f"cannot close a model of shape ({model.rows}, {model.cols})"
        )
    p = model.probabilities[:, : model.rows].copy()
    sums = p.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise DimensionMismatch("a row lost all its probability mass when closing the chain")
    p /= sums
    return TransitionModel(
        p,
        sigma=model.sigma,
        sigma_multiple=model.sigma_multiple,
        source=model.source + "/closed",
        crop_offset=model.crop_offset,
    )


def random_playback(
    model: TransitionModel, start: int, length: int, rng: np.random.Generator
) -> FrameIndexSequence:
    """Stochastic playback: iterate `sample_next` from `start` for `length` frames."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not model.is_square:
        raise DimensionMismatch(
            "model has a dead-end final frame; close_chain() it before random playback"
        )
    if not (0 <= start < model.rows):
        raise IndexOutOfRange(f"start {start} outside rows 0..{model.rows - 1}")
    indices = [start]
    current = start
    for _ in range(length - 1):
        current = sample_next(model, current, rng)
        indices.append(current)
    return FrameIndexSequence.from_indices(indices)


def find_loop(
    shifted: DistanceMatrix, min_length: int, prune_frac: float = DEFAULT_PRUNE_FRAC
) -> Loop:
    """Best seamless loop: the (start, end) pair with the cheapest end->start jump.

    The first and last floor(prune_frac * n) frames are discarded first (clip
    heads and tails often differ from the body). Among remaining pairs of at
    least `min_length` frames, ties on cost prefer the longer loop (more unique
    frames in the output), then the earlier start.
    """
    if shifted.stage != STAGE_SHIFTED:
        raise ValueError(f"loop search expects the shifted stage, got {shifted.stage!r}")
    if not (0.0 <= prune_frac < 0.5):
        raise ValueError(f"prune_frac must be in [0, 0.5), got {prune_frac}")
    if min_length < 2:
        raise ValueError(f"min_length must be >= 2, got {min_length}")

    v = shifted.values
    n = v.shape[1]
    pruned = int(prune_frac * n)
    lo = pruned
    hi = n - 1 - pruned

    best = None
    best_key = None
    # end needs an outgoing row in the shifted matrix, so end <= n - 2
    for end in range(lo + 1, min(hi, v.shape[0] - 1) + 1):
        last_start = end - min_length + 1
        for start in range(lo, min(last_start, end - 1) + 1):
            key = (v[end, start], -(end - start + 1), start)
            if best_key is None or key < best_key:
                best_key = key
                best = (start, end)
    if best is None:
        raise NoFeasibleLoop(
            f"no (start, end) pair of length >= {min_length} within frames [{lo}, {hi}]"
        )
    loop = Loop(start=best[0], end=best[1], cut_cost=float(best_key[0]))
    logger.info(
        "loop: frames %d..%d (length %d, cut cost %.6g)",
        loop.start, loop.end, loop.length, loop.cut_cost,
    )
    return loop


def loop_indices(loop: Loop) -> FrameIndexSequence:
    """The in-order index walk of a loop body."""
    return FrameIndexSequence.from_indices(range(loop.start, loop.end + 1))


def cluster_sequence(
    clustering: Clustering, d: DistanceMatrix, start: int, length: int
) -> FrameIndexSequence:
    """Greedy cluster-guided walk balancing smoothness and variety.

    From the current frame, pick the nearest cluster (by centroid distance)
    that differs from the clusters of both the current and the previous frame,
    then emit that cluster's member closest to the current frame under `d`.
    Needs k >= 3 for the two-cluster exclusion to stay satisfiable. Ties break
    toward the lowest cluster id / frame index, so output is deterministic.
    """
    if clustering.k < 3:
        raise InsufficientClusters(
            f"cluster sequencing needs k >= 3 to exclude two clusters, got k={clustering.k}"
        )
    if d.stage == STAGE_SHIFTED:
        raise ValueError("cluster sequencing expects a square (raw or filtered) matrix")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    n = d.values.shape[0]
    if len(clustering.assignments) != n:
        raise DimensionMismatch(
            f"clustering covers {len(clustering.assignments)} frames, matrix has {n}"
        )
    if not (0 <= start < n):
        raise IndexOutOfRange(f"start {start} outside frames 0..{n - 1}")

    assign = np.asarray(clustering.assignments)
    members = [clustering.members(c) for c in range(clustering.k)]
    cents = clustering.centroids
    cent_dist = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)

    indices = [start]
    prev_frame = None
    current = start
    for _ in range(length - 1):
        excluded = {int(assign[current])}
        if prev_frame is not None:
            excluded.add(int(assign[prev_frame]))
        here = int(assign[current])
        candidates = [c for c in range(clustering.k) if c not in excluded]
        next_cluster = min(candidates, key=lambda c: (cent_dist[here, c], c))
        pool = members[next_cluster]
        if pool.size == 0:
            raise EmptyCluster(f"cluster {next_cluster} has no member frames")
        nxt = int(min(pool, key=lambda m: (d.values[current, m], m)))
        indices.append(nxt)
        prev_frame = current
        current = nxt
    return FrameIndexSequence.from_indices(indices)
