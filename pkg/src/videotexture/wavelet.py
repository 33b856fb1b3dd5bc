"""Haar wavelet frame compression and k-means clustering of the results.

Each frame is reduced to the level-2 approximation subband of an orthonormal
2-D Haar transform (a 16x-smaller gist of the image). Clustering those
descriptors groups visually similar frames, which backs both the
cluster-based distance metric and cluster-guided sequencing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, FrameTooSmall, InvalidK
from .frameio import FrameSequence, to_luma

logger = logging.getLogger(__name__)

_SQRT2 = np.sqrt(2.0)

K_MIN, K_MAX = 1, 10
DESCRIPTOR_LEVELS = 2
SELECT_K_EPS = 1e-12


def _pad_even(a: np.ndarray) -> np.ndarray:
    # replicate the last row/column so both dimensions are even
    pr = a.shape[0] % 2
    pc = a.shape[1] % 2
    if pr or pc:
        a = np.pad(a, ((0, pr), (0, pc)), mode="edge")
    return a


def _haar_forward(a: np.ndarray):
    """One analysis level; each butterfly divides by sqrt(2) (orthonormal)."""
    a = _pad_even(a)
    lo = (a[:, 0::2] + a[:, 1::2]) / _SQRT2
    hi = (a[:, 0::2] - a[:, 1::2]) / _SQRT2
    ll = (lo[0::2, :] + lo[1::2, :]) / _SQRT2
    lh = (lo[0::2, :] - lo[1::2, :]) / _SQRT2
    hl = (hi[0::2, :] + hi[1::2, :]) / _SQRT2
    hh = (hi[0::2, :] - hi[1::2, :]) / _SQRT2
    return ll, lh, hl, hh


def _haar_inverse(ll, lh, hl, hh, shape) -> np.ndarray:
    lo = np.empty((ll.shape[0] * 2, ll.shape[1]), dtype=np.float64)
    hi = np.empty_like(lo)
    lo[0::2, :] = (ll + lh) / _SQRT2
    lo[1::2, :] = (ll - lh) / _SQRT2
    hi[0::2, :] = (hl + hh) / _SQRT2
    hi[1::2, :] = (hl - hh) / _SQRT2
    a = np.empty((lo.shape[0], lo.shape[1] * 2), dtype=np.float64)
    a[:, 0::2] = (lo + hi) / _SQRT2
    a[:, 1::2] = (lo - hi) / _SQRT2
    return a[: shape[0], : shape[1]]  # drop the even-padding


@dataclass(frozen=True)
class WaveletPyramid:
    """Full multi-level coefficient pyramid.

    `details` holds one (lh, hl, hh) triple per level, finest first; `shapes`
    holds each level's pre-padding input shape so the inverse can crop back.
    """

    approximation: np.ndarray
    details: tuple
    shapes: tuple

    @property
    def levels(self) -> int:
        return len(self.details)


def dwt2(image: np.ndarray, levels: int = DESCRIPTOR_LEVELS) -> WaveletPyramid:
    """Multi-level 2-D Haar analysis of a single frame.

    RGB input is converted to luma first. Odd dimensions are handled by edge
    replication; `idwt2` reconstructs the original within float tolerance.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    a = to_luma(image)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a single 2-D frame, got shape {a.shape}")
    if min(a.shape) < 2 ** levels:
        raise FrameTooSmall(
            f"frame {a.shape} too small for {levels} levels (needs >= {2 ** levels} per side)"
        )
    details = []
    shapes = []
    for _ in range(levels):
        shapes.append(a.shape)
        a, lh, hl, hh = _haar_forward(a)
        details.append((lh, hl, hh))
    return WaveletPyramid(approximation=a, details=tuple(details), shapes=tuple(shapes))


def idwt2(pyramid: WaveletPyramid) -> np.ndarray:
    """Invert `dwt2`, reproducing the (luma) input within float tolerance."""
    a = pyramid.approximation
    for (lh, hl, hh), shape in zip(reversed(pyramid.details), reversed(pyramid.shapes)):
        a = _haar_inverse(a, lh, hl, hh, shape)
    return a


@dataclass(frozen=True)
class WaveletDescriptor:
    """Flattened level-2 approximation subband of one frame."""

    frame_index: int
    coefficients: np.ndarray
    subband_shape: tuple

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.float64).ravel()
        rows, cols = self.subband_shape
        if c.size != rows * cols:
            raise DimensionMismatch(
                f"descriptor length {c.size} does not match subband shape {self.subband_shape}"
            )
        object.__setattr__(self, "coefficients", c)


def descriptor(frame: np.ndarray, frame_index: int = 0) -> WaveletDescriptor:
    """Compressed signature of one frame: its level-2 approximation, row-major."""
    pyr = dwt2(frame, levels=DESCRIPTOR_LEVELS)
    return WaveletDescriptor(
        frame_index=frame_index,
        coefficients=pyr.approximation.ravel(),
        subband_shape=pyr.approximation.shape,
    )


def frame_descriptors(seq: FrameSequence) -> list[WaveletDescriptor]:
    """Descriptors for every frame of a sequence, in order."""
    return [descriptor(seq.frame(i), frame_index=i) for i in range(len(seq))]


@dataclass(frozen=True)
class Clustering:
    """k-means result over frame descriptors.

    `assignments[i]` is the cluster id of frame i; `inertia_history` records
    the total within-cluster squared distance after every Lloyd iteration
    (non-increasing by construction).
    """

    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    seed: int
    inertia_history: tuple = ()

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster)


def _descriptor_matrix(descriptors) -> np.ndarray:
    if not descriptors:
        raise EmptyInput("no descriptors to cluster")
    lengths = {d.coefficients.size for d in descriptors}
    if len(lengths) != 1:
        raise DimensionMismatch(f"descriptors have mixed lengths: {sorted(lengths)}")
    return np.stack([d.coefficients for d in descriptors]).astype(np.float64)


def _kpp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # k-means++: first centroid uniform, then proportional to squared distance
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total == 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[i] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centroids[i]) ** 2, axis=1))
    return centroids


def kmeans(descriptors, k: int, seed: int = 0, max_iters: int = 100) -> Clustering:
    """Lloyd's algorithm from a seeded k-means++ start.

    Stops on an assignment fixpoint or after `max_iters`. An empty cluster is
    reseeded with the point currently farthest from its own centroid, which
    keeps k constant and still shrinks the inertia.
    """
    x = _descriptor_matrix(descriptors)
    n = x.shape[0]
    if not (K_MIN <= k <= min(K_MAX, n)):
        raise InvalidK(f"k must be in [1, min(10, {n})], got {k}")

    rng = np.random.default_rng(seed)
    centroids = _kpp_init(x, k, rng)
    prev = None
    history = []
    for _ in range(max_iters):
        d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        assign = np.argmin(d2, axis=1)

        # reseed any empty cluster with the globally worst-fit point
        for c in range(k):
            if not np.any(assign == c):
                fit = np.sum((x - centroids[assign]) ** 2, axis=1)
                worst = int(np.argmax(fit))
                centroids[c] = x[worst]
                assign[worst] = c

        inertia = float(np.sum((x - centroids[assign]) ** 2))
        history.append(inertia)
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        centroids = np.stack(
            [x[assign == c].mean(axis=0) if np.any(assign == c) else centroids[c] for c in range(k)]
        )

    return Clustering(
        k=k,
        assignments=assign,
        centroids=centroids,
        inertia=history[-1],
        seed=seed,
        inertia_history=tuple(history),
    )


def _interclass(centroids: np.ndarray) -> float:
    k = centroids.shape[0]
    if k < 2:
        return 0.0
    dists = [
        float(np.linalg.norm(centroids[i] - centroids[j]))
        for i in range(k)
        for j in range(i + 1, k)
    ]
    return float(np.mean(dists))


def select_k(descriptors, k_range: tuple = (K_MIN, K_MAX), seed: int = 0):
    """Run kmeans over a range of k and pick the best scoring clustering.

    The per-k report lists intraclass spread (inertia) and interclass spread
    (mean pairwise centroid distance); the automatic choice maximizes
    interclass / (intraclass + eps). The report is returned so a human can
    inspect the scores and override the choice.
    """
    x = _descriptor_matrix(descriptors)
    lo, hi = k_range
    if not (K_MIN <= lo <= hi <= K_MAX):
        raise InvalidK(f"k_range must lie within [{K_MIN}, {K_MAX}], got {k_range}")
    # never ask for more clusters than there are distinct descriptors
    distinct = np.unique(x, axis=0).shape[0]
    hi = min(hi, x.shape[0], distinct)
    lo = min(lo, hi)

    per_k = []
    clusterings = {}
    for k in range(lo, hi + 1):
        cl = kmeans(descriptors, k, seed=seed)
        clusterings[k] = cl
        intra = cl.inertia
        inter = _interclass(cl.centroids)
        per_k.append(
            {
                "k": k,
                "intraclass": intra,
                "interclass": inter,
                "score": inter / (intra + SELECT_K_EPS),
            }
        )

    best = max(per_k, key=lambda row: (row["score"], -row["k"]))
    report = {
        "per_k": per_k,
        "chosen_k": best["k"],
        "distinct_descriptors": int(distinct),
        "seed": seed,
    }
    logger.info("select_k chose k=%d over k in [%d, %d]", best["k"], lo, hi)
    return clusterings[best["k"]], report
