"""End-to-end pipeline orchestration.

Wires load -> normalize -> analyze -> synthesize -> render -> write, emits
the artifact files, and caches analysis results keyed by a content hash of
the input plus the analysis-relevant configuration, so re-synthesizing with
a new seed or transition plan skips the O(n^2) distance work.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import analysis, preprocess, synthesis, transitions, wavelet
from .analysis import DistanceMatrix, MetricKind, TransitionModel
from .errors import MissingInput, VideoTextureError
from .frameio import FrameSequence, load_frames, render_heatmap, write_animation
from .wavelet import Clustering

logger = logging.getLogger(__name__)

CACHE_ENV_VAR = "VIDEOTEXTURE_CACHE_DIR"
_CACHE_VERSION = 1

GIF_NAME = "texture.gif"
SEQUENCE_NAME = "sequence.json"
SUMMARY_NAME = "summary.json"
CLUSTERS_NAME = "clusters.json"
HEATMAP_NAMES = {"raw": "D_raw.png", "filtered": "D_filtered.png", "probabilities": "P.png"}


class PipelineConfig(BaseModel):
    """Every knob of one pipeline invocation; round-trips losslessly via JSON."""

    model_config = ConfigDict(extra="forbid")

    input_path: str
    output_path: str = "out"
    input_kind: Literal["auto", "stills", "animation"] = "auto"
    delay_ms: int = Field(default=100, gt=0, description="frame delay for stills input")

    metric: Literal["ssd", "chebyshev", "wavelet"] = "ssd"
    taps: Literal[0, 2, 4] = 4
    sigma_multiple: float = Field(default=analysis.DEFAULT_SIGMA_MULTIPLE, gt=0)
    normalize: bool = False
    pct_low: float = Field(default=preprocess.DEFAULT_LOW_PCT, ge=0.0, le=1.0)
    pct_high: float = Field(default=preprocess.DEFAULT_HIGH_PCT, ge=0.0, le=1.0)
    k: Optional[int] = Field(default=None, ge=1, le=10, description="None selects k automatically")
    seed: int = 0

    mode: Literal["loop", "random", "cluster"] = "loop"
    length: int = Field(default=120, ge=1)
    min_loop: Optional[int] = Field(default=None, ge=2)
    prune_frac: float = Field(default=synthesis.DEFAULT_PRUNE_FRAC, ge=0.0, lt=0.5)
    transition: Literal["cut", "crossfade", "interpolate"] = "crossfade"
    steps: int = Field(default=transitions.DEFAULT_STEPS, ge=0)
    loop_forever: bool = True

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.pct_low >= self.pct_high:
            raise ValueError(f"pct_low must be < pct_high, got ({self.pct_low}, {self.pct_high})")
        return self


def transition_plan(config: PipelineConfig) -> transitions.TransitionPlan:
    """TransitionPlan from config; cut mode ignores the steps knob."""
    if config.transition == transitions.MODE_CUT:
        return transitions.TransitionPlan(mode=transitions.MODE_CUT, steps=0)
    steps = max(config.steps, 1)
    return transitions.TransitionPlan(mode=config.transition, steps=steps)


@contextmanager
def _stage(name: str):
    """Tag escaping domain errors with the pipeline stage that raised them."""
    try:
        yield
    except VideoTextureError as exc:
        if getattr(exc, "staged", False):
            raise
        wrapped = type(exc)(f"[{name}] {exc}")
        wrapped.staged = True
        raise wrapped from exc


@dataclass
class AnalysisBundle:
    """Everything the synthesis stage needs, recomputed or loaded from cache."""

    raw: DistanceMatrix
    filtered: DistanceMatrix
    shifted: DistanceMatrix
    model: TransitionModel
    clustering: Optional[Clustering]
    cluster_report: Optional[dict]
    summary: dict
    seq: Optional[FrameSequence] = None  # loaded lazily on cache hits


# --- caching ----------------------------------------------------------------

def cache_root() -> Path:
    override = os.environ.get(CACHE_ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "videotexture"


def input_digest(config: PipelineConfig) -> str:
    """Content hash of the input clip (names and bytes)."""
    path = Path(config.input_path)
    if not path.exists():
        raise MissingInput(f"input path does not exist: {path}")
    h = hashlib.sha256()
    if path.is_dir():
        files = sorted(path.glob("*.png"))
        if not files:
            raise MissingInput(f"no *.png files found in {path}")
        for f in files:
            h.update(f.name.encode())
            h.update(f.read_bytes())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()


def analysis_cache_key(config: PipelineConfig, digest: str) -> str:
    relevant = {
        "version": _CACHE_VERSION,
        "input": digest,
        "metric": config.metric,
        "taps": config.taps,
        "sigma_multiple": config.sigma_multiple,
        "normalize": config.normalize,
        "pct_low": config.pct_low,
        "pct_high": config.pct_high,
    }
    if config.metric == "wavelet":
        relevant["k"] = config.k
        relevant["seed"] = config.seed
    blob = json.dumps(relevant, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _dump_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _cluster_payload(clustering: Clustering, report: Optional[dict]) -> dict:
    return {
        "k": clustering.k,
        "seed": clustering.seed,
        "inertia": clustering.inertia,
        "inertia_history": list(clustering.inertia_history),
        "assignments": [int(a) for a in clustering.assignments],
        "centroids": [[float(v) for v in c] for c in clustering.centroids],
        "report": report,
    }


def _save_cache(entry: Path, bundle: AnalysisBundle) -> None:
    entry.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        entry / "matrices.npz",
        raw=bundle.raw.values,
        filtered=bundle.filtered.values,
        shifted=bundle.shifted.values,
        probabilities=bundle.model.probabilities,
    )
    meta = {
        "summary": bundle.summary,
        "filtered_stage": bundle.filtered.stage,
        "model_source": bundle.model.source,
        "cluster": (
            _cluster_payload(bundle.clustering, bundle.cluster_report)
            if bundle.clustering is not None
            else None
        ),
    }
    _dump_json(meta, entry / "meta.json")


def _load_cache(entry: Path) -> AnalysisBundle:
    meta = json.loads((entry / "meta.json").read_text())
    arrays = np.load(entry / "matrices.npz")
    summary = meta["summary"]
    metric = summary["metric"]
    crop = summary["crop_offset"]

    raw = DistanceMatrix(arrays["raw"], metric_label=metric, stage=analysis.STAGE_RAW)
    filtered = DistanceMatrix(
        arrays["filtered"], metric_label=metric, stage=meta["filtered_stage"], crop_offset=crop
    )
    shifted = DistanceMatrix(
        arrays["shifted"], metric_label=metric, stage=analysis.STAGE_SHIFTED, crop_offset=crop
    )
    model = TransitionModel(
        arrays["probabilities"],
        sigma=summary["sigma"],
        sigma_multiple=summary["sigma_multiple"],
        source=meta["model_source"],
        crop_offset=crop,
    )
    clustering = None
    report = None
    if meta["cluster"] is not None:
        c = meta["cluster"]
        clustering = Clustering(
            k=c["k"],
            assignments=np.array(c["assignments"], dtype=np.int64),
            centroids=np.array(c["centroids"], dtype=np.float64),
            inertia=c["inertia"],
            seed=c["seed"],
            inertia_history=tuple(c["inertia_history"]),
        )
        report = c["report"]
    return AnalysisBundle(
        raw=raw,
        filtered=filtered,
        shifted=shifted,
        model=model,
        clustering=clustering,
        cluster_report=report,
        summary=summary,
    )


# --- analysis ----------------------------------------------------------------

def _load_input(config: PipelineConfig) -> FrameSequence:
    with _stage("load-input"):
        seq = load_frames(config.input_path, kind=config.input_kind, delay_ms=config.delay_ms)
    if config.normalize:
        with _stage("normalize"):
            bounds = preprocess.compute_bounds(seq, config.pct_low, config.pct_high)
            seq = preprocess.normalize_intensity(seq, bounds)
    return seq


def _compute_analysis(config: PipelineConfig, digest: str) -> AnalysisBundle:
    seq = _load_input(config)

    clustering = None
    report = None
    if config.metric == "wavelet":
        with _stage("wavelet-clustering"):
            descriptors = wavelet.frame_descriptors(seq)
            if config.k is None:
                clustering, report = wavelet.select_k(descriptors, seed=config.seed)
            else:
                clustering = wavelet.kmeans(descriptors, config.k, seed=config.seed)

    with _stage("distance-matrix"):
        raw = analysis.distance_matrix(seq, MetricKind(config.metric), clustering)
    with _stage("dynamics-filter"):
        filtered = analysis.preserve_dynamics(raw, config.taps) if config.taps else raw
    with _stage("future-shift"):
        shifted = analysis.future_shift(filtered)
    with _stage("probability-matrix"):
        model = analysis.probability_matrix(shifted, config.sigma_multiple)

    summary = {
        "n_frames": len(seq),
        "n_analysis": shifted.frame_count,
        "metric": config.metric,
        "taps": config.taps,
        "crop_offset": shifted.crop_offset,
        "sigma": model.sigma,
        "sigma_multiple": config.sigma_multiple,
        "normalized": config.normalize,
        "chosen_k": clustering.k if clustering is not None else None,
        "input_digest": digest,
        "probability_source": model.source,
    }
    return AnalysisBundle(
        raw=raw,
        filtered=filtered,
        shifted=shifted,
        model=model,
        clustering=clustering,
        cluster_report=report,
        summary=summary,
        seq=seq,
    )


def load_or_compute(config: PipelineConfig) -> tuple[AnalysisBundle, bool]:
    """Fetch the analysis bundle from cache, or compute and store it."""
    digest = input_digest(config)
    entry = cache_root() / analysis_cache_key(config, digest)
    if (entry / "meta.json").exists():
        logger.info("analysis cache hit: %s", entry)
        return _load_cache(entry), True
    bundle = _compute_analysis(config, digest)
    _save_cache(entry, bundle)
    return bundle, False


def ensure_frames(bundle: AnalysisBundle, config: PipelineConfig) -> FrameSequence:
    """Frames for rendering; reloaded from the input on cache hits."""
    if bundle.seq is None:
        bundle.seq = _load_input(config)
    return bundle.seq


# --- entry points --------------------------------------------------------------

def _write_heatmaps(bundle: AnalysisBundle, out: Path, scale: int = 1) -> dict:
    with _stage("render-heatmaps"):
        artifacts = {}
        for key, matrix in (
            ("raw", bundle.raw.values),
            ("filtered", bundle.filtered.values),
            ("probabilities", bundle.model.probabilities),
        ):
            path = out / HEATMAP_NAMES[key]
            render_heatmap(matrix, path, scale=scale)
            artifacts[key] = str(path)
    return artifacts


def run_analyze(config: PipelineConfig) -> dict:
    """Analyze the clip and emit heatmaps plus the JSON summary sidecar."""
    bundle, cache_hit = load_or_compute(config)
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)

    artifacts = _write_heatmaps(bundle, out)
    _dump_json(bundle.summary, out / SUMMARY_NAME)
    artifacts["summary"] = str(out / SUMMARY_NAME)
    if bundle.clustering is not None:
        _dump_json(_cluster_payload(bundle.clustering, bundle.cluster_report), out / CLUSTERS_NAME)
        artifacts["clusters"] = str(out / CLUSTERS_NAME)

    return {"summary": bundle.summary, "artifacts": artifacts, "cache_hit": cache_hit}


def _synthesize_indices(config: PipelineConfig, bundle: AnalysisBundle):
    """Pick the output frame ordering for the configured mode."""
    rng = np.random.default_rng(config.seed)
    loop = None
    if config.mode == "loop":
        with _stage("loop-search"):
            n = bundle.shifted.frame_count
            min_length = config.min_loop or synthesis.default_min_loop(n)
            loop = synthesis.find_loop(bundle.shifted, min_length, config.prune_frac)
            seq_idx = synthesis.loop_indices(loop)
        crop = bundle.shifted.crop_offset
        extra = {
            "loop": {
                "start": loop.start,
                "end": loop.end,
                "length": loop.length,
                "cut_cost": loop.cut_cost,
                "min_length": min_length,
                "prune_frac": config.prune_frac,
            }
        }
    elif config.mode == "random":
        with _stage("random-playback"):
            model = synthesis.close_chain(bundle.model)
            seq_idx = synthesis.random_playback(model, 0, config.length, rng)
        crop = bundle.model.crop_offset
        extra = {}
    else:
        with _stage("cluster-walk"):
            clustering = bundle.clustering
            if clustering is None:
                # cluster mode with a non-wavelet metric: cluster on demand
                descriptors = wavelet.frame_descriptors(ensure_frames(bundle, config))
                if config.k is None:
                    clustering, _ = wavelet.select_k(descriptors, seed=config.seed)
                else:
                    clustering = wavelet.kmeans(descriptors, config.k, seed=config.seed)
            seq_idx = synthesis.cluster_sequence(clustering, bundle.raw, 0, config.length)
        crop = bundle.raw.crop_offset
        extra = {}
    return seq_idx, crop, extra


def run_synthesize(config: PipelineConfig) -> dict:
    """Synthesize a frame ordering, render it, and write the GIF + sequence JSON."""
    bundle, cache_hit = load_or_compute(config)
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)

    seq_idx, crop, extra = _synthesize_indices(config, bundle)
    original = seq_idx.remapped(crop)
    plan = transition_plan(config)
    frames = ensure_frames(bundle, config)
    with _stage("render"):
        rendered = transitions.render(original, frames, plan, wrap=(config.mode == "loop"))
    gif_path = out / GIF_NAME
    with _stage("write-animation"):
        write_animation(rendered, gif_path, loop_forever=config.loop_forever)

    payload = {
        "mode": config.mode,
        "seed": config.seed,
        "crop_offset": crop,
        "analysis_indices": list(seq_idx.indices),
        "original_indices": list(original.indices),
        "transitions": seq_idx.to_jsonable()["transitions"],
        "transition_plan": {"mode": plan.mode, "steps": plan.steps},
        "rendered_frames": len(rendered),
        "loop": extra.get("loop"),
    }
    _dump_json(payload, out / SEQUENCE_NAME)

    return {
        "gif": str(gif_path),
        "sequence": str(out / SEQUENCE_NAME),
        "mode": config.mode,
        "rendered_frames": len(rendered),
        "loop": extra.get("loop"),
        "cache_hit": cache_hit,
        "summary": bundle.summary,
    }


def run_visualize(config: PipelineConfig, scale: int = 1) -> dict:
    """Re-render the heatmaps (typically from cache) at an integer upscale."""
    bundle, cache_hit = load_or_compute(config)
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = _write_heatmaps(bundle, out, scale=scale)
    return {"artifacts": artifacts, "cache_hit": cache_hit, "summary": bundle.summary}
