"""Frame distance matrices and the transition probability model.

The pipeline is: pairwise distance matrix over all frames -> diagonal
binomial filtering so transition costs account for neighboring frames
(preserving motion direction) -> one-row shift so the cost of cutting from
frame i to frame j measures how similar frame i+1 (the true successor) is
to frame j -> exponential map and row normalization into a stochastic
matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    AllZeroDistances,
    DimensionMismatch,
    MatrixTooSmall,
    MissingClustering,
    NonPositiveSigmaMultiple,
    TooFewFrames,
)
from .frameio import FrameSequence
from .wavelet import Clustering

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_MULTIPLE = 0.05

STAGE_RAW = "raw"
STAGE_FILTERED = "filtered"
STAGE_SHIFTED = "shifted"

# diagonal filter weights: normalized binomial coefficients, keyed by tap count,
# each with the diagonal offsets its taps cover
_FILTERS = {
    2: (np.array([1.0, 1.0]) / 2.0, (0, 1)),
    4: (np.array([1.0, 3.0, 3.0, 1.0]) / 8.0, (-1, 0, 1, 2)),
}


class MetricKind(str, Enum):
    """Pluggable frame-distance metrics."""

    SSD = "ssd"
    CHEBYSHEV = "chebyshev"
    WAVELET_CLUSTER = "wavelet"


@dataclass(frozen=True)
class DistanceMatrix:
    """Pairwise frame dissimilarity and its filtered/shifted derivatives.

    `crop_offset` is the original frame index corresponding to row/column 0
    after the filtering crop, so downstream consumers can map back to frames.
    The shifted stage is rectangular: entry (i, j) is the filtered entry
    (i+1, j), i.e. rows index the current frame and columns the candidate
    next frame.
    """

    values: np.ndarray
    metric_label: str
    stage: str = STAGE_RAW
    crop_offset: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise DimensionMismatch(f"distance matrix must be 2-D and non-empty, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DimensionMismatch("distance matrix contains non-finite entries")
        if np.any(v < 0):
            raise DimensionMismatch("distance matrix contains negative entries")
        if self.stage == STAGE_RAW:
            if v.shape[0] != v.shape[1]:
                raise DimensionMismatch(f"raw matrix must be square, got {v.shape}")
            if np.any(np.diag(v) != 0):
                raise DimensionMismatch("raw matrix must have a zero diagonal")
            if not np.allclose(v, v.T, rtol=0.0, atol=1e-9):
                raise DimensionMismatch("raw matrix must be symmetric")
        elif self.stage == STAGE_FILTERED:
            if v.shape[0] != v.shape[1]:
                raise DimensionMismatch(f"filtered matrix must be square, got {v.shape}")
        elif self.stage == STAGE_SHIFTED:
            if v.shape[0] != v.shape[1] - 1:
                raise DimensionMismatch(
                    f"shifted matrix must have shape (n-1, n), got {v.shape}"
                )
        else:
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.crop_offset < 0:
            raise ValueError(f"crop_offset must be >= 0, got {self.crop_offset}")
        object.__setattr__(self, "values", v)

    @property
    def frame_count(self) -> int:
        """Number of frames this matrix covers (columns for the shifted stage)."""
        return self.values.shape[1]


@dataclass(frozen=True)
class TransitionModel:
    """Row-stochastic next-frame probabilities plus their construction record."""

    probabilities: np.ndarray
    sigma: float
    sigma_multiple: float
    source: str
    crop_offset: int = 0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.ndim != 2 or p.size == 0:
            raise DimensionMismatch(f"probability matrix must be 2-D, got {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise DimensionMismatch("probabilities must lie in [0, 1]")
        if not np.allclose(p.sum(axis=1), 1.0, rtol=0.0, atol=1e-9):
            raise DimensionMismatch("every row must sum to 1 within 1e-9")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "probabilities", p)

    @property
    def rows(self) -> int:
        return self.probabilities.shape[0]

    @property
    def cols(self) -> int:
        return self.probabilities.shape[1]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


def _pairwise(seq: FrameSequence, reducer) -> np.ndarray:
    # Fill the upper triangle row by row and mirror; keeps the matrix exactly
    # symmetric with an exactly zero diagonal.
    n = len(seq)
    flat = seq.frames.reshape(n, -1).astype(np.float64)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        diff = flat[i + 1 :] - flat[i]
        out[i, i + 1 :] = reducer(diff)
        out[i + 1 :, i] = out[i, i + 1 :]
    return out


def distance_matrix(
    seq: FrameSequence,
    metric: MetricKind = MetricKind.SSD,
    clustering: Clustering | None = None,
) -> DistanceMatrix:
    """Raw-stage pairwise distance matrix under the chosen metric.

    ssd sums squared per-sample differences over all channels; chebyshev takes
    the maximum absolute per-sample difference. The wavelet metric measures
    the Euclidean distance between the centroid vectors of the two frames'
    clusters (zero when they share a cluster) and requires a Clustering that
    covers every frame.
    """
    n = len(seq)
    if n < 2:
        raise TooFewFrames(f"distance matrix needs at least 2 frames, got {n}")
    metric = MetricKind(metric)

    if metric is MetricKind.SSD:
        values = _pairwise(seq, lambda d: np.sum(d * d, axis=1))
    elif metric is MetricKind.CHEBYSHEV:
        values = _pairwise(seq, lambda d: np.max(np.abs(d), axis=1))
    else:
        if clustering is None:
            raise MissingClustering("the wavelet metric requires a frame clustering")
        if len(clustering.assignments) != n:
            raise DimensionMismatch(
                f"clustering covers {len(clustering.assignments)} frames, sequence has {n}"
            )
        cents = clustering.centroids
        table = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)
        a = np.asarray(clustering.assignments)
        values = table[a[:, None], a[None, :]]

    logger.info("built %s distance matrix for %d frames", metric.value, n)
    return DistanceMatrix(values, metric_label=metric.value, stage=STAGE_RAW)


def preserve_dynamics(d: DistanceMatrix, taps: int = 4) -> DistanceMatrix:
    """Filter the matrix along its diagonals with binomial weights.

    Entry (i, j) becomes the weighted sum of entries (i+k, j+k) over the tap
    offsets, so the cost of matching frame i to frame j also reflects how well
    their temporal neighborhoods match; this is what keeps synthesized motion
    from jittering back and forth. Rows and columns whose offsets fall outside
    the matrix are cropped, and crop_offset records the new origin.
    """
    if d.stage != STAGE_RAW:
        raise ValueError(f"dynamics filtering applies to the raw stage, got {d.stage!r}")
    if taps not in _FILTERS:
        raise ValueError(f"taps must be one of {sorted(_FILTERS)}, got {taps}")
    n = d.values.shape[0]
    if n <= taps:
        raise MatrixTooSmall(f"need more than {taps} frames to filter, got {n}")

    weights, offsets = _FILTERS[taps]
    lead = -min(offsets)      # rows cropped at the start
    trail = max(offsets)      # rows cropped at the end
    m = n - lead - trail
    out = np.zeros((m, m), dtype=np.float64)
    for w, off in zip(weights, offsets):
        k = lead + off
        out += w * d.values[k : k + m, k : k + m]

    return DistanceMatrix(
        out,
        metric_label=d.metric_label,
        stage=STAGE_FILTERED,
        crop_offset=d.crop_offset + lead,
    )


def future_shift(d: DistanceMatrix) -> DistanceMatrix:
    """Align rows with the successor frame: shifted(i, j) = d(i+1, j).

    After the shift, entry (i, j) is the cost of cutting from frame i to frame
    j, i.e. how dissimilar frame j is from what would naturally have played
    next. Playing on in order (j = i+1) costs d(i+1, i+1) = 0 on a raw matrix.
    The result drops the last row, whose frame has no known successor.
    """
    if d.stage == STAGE_SHIFTED:
        raise ValueError("matrix is already shifted")
    if d.values.shape[0] < 2:
        raise MatrixTooSmall("need at least 2 frames to shift")
    return DistanceMatrix(
        d.values[1:, :],
        metric_label=d.metric_label,
        stage=STAGE_SHIFTED,
        crop_offset=d.crop_offset,
    )


def probability_matrix(
    d: DistanceMatrix, sigma_multiple: float = DEFAULT_SIGMA_MULTIPLE
) -> TransitionModel:
    """Map distances to row-stochastic transition probabilities.

    sigma is the mean of the strictly positive distances times
    `sigma_multiple`; each entry becomes exp(-d/sigma) and rows are normalized
    to sum to 1. Small multiples force only the best transitions; larger ones
    allow more randomness. Exact zeros (duplicate frames) are excluded from
    the mean but keep the maximal weight exp(0) = 1.
    """
    if sigma_multiple <= 0:
        raise NonPositiveSigmaMultiple(f"sigma_multiple must be > 0, got {sigma_multiple}")
    positive = d.values[d.values > 0]
    if positive.size == 0:
        raise AllZeroDistances("all distances are zero; sigma is undefined")
    sigma = float(positive.mean() * sigma_multiple)

    p = np.exp(-d.values / sigma)
    p /= p.sum(axis=1, keepdims=True)
    logger.info("built transition model (sigma=%.6g, stage=%s)", sigma, d.stage)
    return TransitionModel(
        p,
        sigma=sigma,
        sigma_multiple=sigma_multiple,
        source=f"{d.stage}/{d.metric_label}",
        crop_offset=d.crop_offset,
    )
