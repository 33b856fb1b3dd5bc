import json

import numpy as np
import pytest
from PIL import Image

from videotexture import PipelineConfig, run_analyze, run_synthesize, run_visualize
from videotexture.errors import InsufficientClusters, MissingInput
from videotexture.pipeline import analysis_cache_key, input_digest, transition_plan

from helpers import make_motion_clip, make_noise_seq, make_periodic, write_stills


@pytest.fixture
def periodic_dir(tmp_path):
    return write_stills(make_periodic(period=12, repeats=3, h=24, w=32), tmp_path / "clip")


def config_for(clip_dir, out, **overrides):
    values = dict(input_path=str(clip_dir), output_path=str(out), seed=0)
    values.update(overrides)
    return PipelineConfig(**values)


# --- configuration ---------------------------------------------------------------

def test_config_round_trips_through_json():
    cfg = PipelineConfig(input_path="clip", metric="wavelet", k=5, normalize=True, taps=2)
    restored = PipelineConfig.model_validate_json(cfg.model_dump_json())
    assert restored == cfg


def test_config_defaults():
    cfg = PipelineConfig(input_path="clip")
    assert cfg.metric == "ssd" and cfg.taps == 4
    assert cfg.sigma_multiple == 0.05
    assert (cfg.pct_low, cfg.pct_high) == (0.01, 0.99)
    assert cfg.mode == "loop" and cfg.transition == "crossfade" and cfg.steps == 4
    assert cfg.prune_frac == 0.05 and cfg.k is None


@pytest.mark.parametrize(
    "bad",
    [
        {"taps": 3},
        {"sigma_multiple": 0.0},
        {"pct_low": 0.9, "pct_high": 0.2},
        {"prune_frac": 0.6},
        {"k": 11},
        {"mode": "fancy"},
        {"length": 0},
        {"unknown_field": 1},
    ],
)
def test_config_rejects_bad_values(bad):
    with pytest.raises(ValueError):
        PipelineConfig(input_path="clip", **bad)


def test_transition_plan_normalizes_cut_steps():
    cut = transition_plan(PipelineConfig(input_path="x", transition="cut", steps=4))
    assert (cut.mode, cut.steps) == ("cut", 0)
    fade = transition_plan(PipelineConfig(input_path="x", transition="crossfade", steps=0))
    assert fade.steps >= 1


# --- analyze ------------------------------------------------------------------------

def test_analyze_emits_expected_artifacts(periodic_dir, tmp_path):
    out = tmp_path / "out"
    result = run_analyze(config_for(periodic_dir, out))
    for name in ("D_raw.png", "D_filtered.png", "P.png", "summary.json"):
        assert (out / name).exists()
    summary = result["summary"]
    assert summary["n_frames"] == 36
    assert summary["taps"] == 4 and summary["crop_offset"] == 1
    assert summary["n_analysis"] == 33  # 36 cropped by the 4-tap filter
    assert summary["sigma"] > 0
    assert result["cache_hit"] is False
    # heatmap dimensions match the matrices
    with Image.open(out / "D_raw.png") as img:
        assert img.size == (36, 36)
    with Image.open(out / "P.png") as img:
        assert img.size == (33, 32)  # shifted-stage model is rectangular


def test_analyze_is_deterministic_and_cached(periodic_dir, tmp_path):
    cfg1 = config_for(periodic_dir, tmp_path / "a")
    cfg2 = config_for(periodic_dir, tmp_path / "b")
    first = run_analyze(cfg1)
    second = run_analyze(cfg2)
    assert second["cache_hit"] is True
    assert (tmp_path / "a/summary.json").read_bytes() == (tmp_path / "b/summary.json").read_bytes()


def test_cache_key_separates_analysis_relevant_fields(periodic_dir, tmp_path):
    base = config_for(periodic_dir, tmp_path / "o")
    digest = input_digest(base)
    same = config_for(periodic_dir, tmp_path / "o2", seed=9, steps=2, mode="random")
    assert analysis_cache_key(base, digest) == analysis_cache_key(same, digest)
    other = config_for(periodic_dir, tmp_path / "o3", taps=2)
    assert analysis_cache_key(base, digest) != analysis_cache_key(other, digest)
    # seed only matters for the clustering-backed metric
    wav_a = config_for(periodic_dir, tmp_path / "o4", metric="wavelet", seed=1)
    wav_b = config_for(periodic_dir, tmp_path / "o5", metric="wavelet", seed=2)
    assert analysis_cache_key(wav_a, digest) != analysis_cache_key(wav_b, digest)


def test_missing_input_names_path(tmp_path):
    cfg = config_for(tmp_path / "nothing-here", tmp_path / "out")
    with pytest.raises(MissingInput, match="nothing-here"):
        run_analyze(cfg)


def test_wavelet_analysis_reports_chosen_k(tmp_path):
    clip = write_stills(make_periodic(period=5, repeats=4, h=16, w=16), tmp_path / "clip")
    out = tmp_path / "out"
    result = run_analyze(config_for(clip, out, metric="wavelet", taps=0))
    assert result["summary"]["chosen_k"] is not None
    assert (out / "clusters.json").exists()
    payload = json.loads((out / "clusters.json").read_text())
    assert len(payload["assignments"]) == 20
    assert payload["report"]["chosen_k"] == payload["k"]


# --- synthesize ------------------------------------------------------------------------

def test_loop_synthesis_gif_frame_count(periodic_dir, tmp_path):
    out = tmp_path / "out"
    cfg = config_for(periodic_dir, out, mode="loop", min_loop=12, prune_frac=0.0, steps=4)
    result = run_synthesize(cfg)
    seq = json.loads((out / "sequence.json").read_text())
    assert seq["loop"]["cut_cost"] == 0.0
    assert seq["loop"]["length"] % 12 == 0
    assert result["rendered_frames"] == seq["loop"]["length"] + 4  # wrap transition frames
    with Image.open(result["gif"]) as img:
        assert img.n_frames == result["rendered_frames"]
        assert img.info.get("loop") == 0
    # indices are remapped by the filter crop
    assert seq["original_indices"][0] == seq["analysis_indices"][0] + seq["crop_offset"]


def test_random_synthesis_deterministic(periodic_dir, tmp_path):
    cfg_a = config_for(periodic_dir, tmp_path / "a", mode="random", length=40, seed=7)
    cfg_b = config_for(periodic_dir, tmp_path / "b", mode="random", length=40, seed=7)
    run_synthesize(cfg_a)
    run_synthesize(cfg_b)
    assert (tmp_path / "a/sequence.json").read_bytes() == (tmp_path / "b/sequence.json").read_bytes()
    different = config_for(periodic_dir, tmp_path / "c", mode="random", length=40, seed=8)
    run_synthesize(different)
    a = json.loads((tmp_path / "a/sequence.json").read_text())
    c = json.loads((tmp_path / "c/sequence.json").read_text())
    assert a["analysis_indices"] != c["analysis_indices"]


def test_random_synthesis_length_and_cuts(periodic_dir, tmp_path):
    out = tmp_path / "out"
    cfg = config_for(periodic_dir, out, mode="random", length=30, transition="cut", steps=0)
    result = run_synthesize(cfg)
    seq = json.loads((out / "sequence.json").read_text())
    assert len(seq["analysis_indices"]) == 30
    assert result["rendered_frames"] == 30


def test_cluster_mode_with_too_few_clusters(periodic_dir, tmp_path):
    cfg = config_for(periodic_dir, tmp_path / "out", mode="cluster", metric="wavelet", k=2)
    with pytest.raises(InsufficientClusters):
        run_synthesize(cfg)


def test_cluster_mode_clusters_on_demand(tmp_path):
    clip = write_stills(make_motion_clip(n_frames=30, h=24, w=32, period=10), tmp_path / "clip")
    out = tmp_path / "out"
    cfg = config_for(clip, out, mode="cluster", metric="ssd", k=4, length=20, taps=0)
    result = run_synthesize(cfg)
    seq = json.loads((out / "sequence.json").read_text())
    assert len(seq["analysis_indices"]) == 20
    assert seq["crop_offset"] == 0  # cluster walks run on the uncropped matrix
    assert result["loop"] is None


def test_synthesize_reuses_cached_analysis(periodic_dir, tmp_path):
    run_analyze(config_for(periodic_dir, tmp_path / "a"))
    result = run_synthesize(config_for(periodic_dir, tmp_path / "b", min_loop=12))
    assert result["cache_hit"] is True


def test_gif_input_keeps_its_delay(tmp_path):
    from videotexture import write_animation

    clip = make_periodic(period=8, repeats=3, h=16, w=16, delay=70)
    gif = tmp_path / "clip.gif"
    write_animation(clip, gif)
    out = tmp_path / "out"
    cfg = config_for(gif, out, mode="loop", min_loop=8, prune_frac=0.0, transition="cut", steps=0)
    result = run_synthesize(cfg)
    with Image.open(result["gif"]) as img:
        assert img.info.get("duration") == 70  # input timing carried through


# --- visualize --------------------------------------------------------------------------

def test_visualize_rescales_heatmaps(periodic_dir, tmp_path):
    run_analyze(config_for(periodic_dir, tmp_path / "a"))
    result = run_visualize(config_for(periodic_dir, tmp_path / "v"), scale=3)
    assert result["cache_hit"] is True
    with Image.open(tmp_path / "v/D_raw.png") as img:
        assert img.size == (108, 108)


# --- normalization through the pipeline ----------------------------------------------------

def test_normalize_changes_analysis(tmp_path):
    rng = np.random.default_rng(90)
    # a dim clip occupying a narrow intensity band
    frames = (rng.random((8, 16, 16, 3)) * 40 + 60).astype(np.uint8)
    from videotexture import FrameSequence

    clip = write_stills(FrameSequence(frames, 40), tmp_path / "clip")
    plain = run_analyze(config_for(clip, tmp_path / "p", taps=0))
    stretched = run_analyze(config_for(clip, tmp_path / "n", taps=0, normalize=True))
    assert stretched["summary"]["normalized"] is True
    assert stretched["summary"]["sigma"] != plain["summary"]["sigma"]
