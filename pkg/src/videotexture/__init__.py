"""Video texture analysis and synthesis: turn a short clip into a seamless,
arbitrarily long looping animation."""

__version__ = "0.1.0"

from .analysis import (
    DistanceMatrix,
    MetricKind,
    TransitionModel,
    distance_matrix,
    future_shift,
    preserve_dynamics,
    probability_matrix,
)
from .errors import VideoTextureError
from .frameio import FrameSequence, load_frames, render_heatmap, write_animation
from .pipeline import PipelineConfig, run_analyze, run_synthesize, run_visualize
from .preprocess import IntensityBounds, compute_bounds, normalize_intensity
from .synthesis import (
    FrameIndexSequence,
    Loop,
    close_chain,
    cluster_sequence,
    find_loop,
    random_playback,
    sample_next,
)
from .transitions import TransitionPlan, blend, intermediate_frames, render
from .wavelet import Clustering, WaveletDescriptor, descriptor, dwt2, idwt2, kmeans, select_k

__all__ = [
    "__version__",
    "Clustering",
    "DistanceMatrix",
    "FrameIndexSequence",
    "FrameSequence",
    "IntensityBounds",
    "Loop",
    "MetricKind",
    "PipelineConfig",
    "TransitionModel",
    "TransitionPlan",
    "VideoTextureError",
    "WaveletDescriptor",
    "blend",
    "close_chain",
    "cluster_sequence",
    "compute_bounds",
    "descriptor",
    "distance_matrix",
    "dwt2",
    "find_loop",
    "future_shift",
    "idwt2",
    "intermediate_frames",
    "kmeans",
    "load_frames",
    "normalize_intensity",
    "preserve_dynamics",
    "probability_matrix",
    "random_playback",
    "render",
    "render_heatmap",
    "run_analyze",
    "run_synthesize",
    "run_visualize",
    "sample_next",
    "select_k",
    "write_animation",
]
