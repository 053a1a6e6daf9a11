from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest

from headeval.features import load_feature_bundle, validate_bundle
from headeval.fixtures import (
    CorpusSpec,
    FixtureSpec,
    build_fixture_bundle,
    build_fixture_topology,
    demo_corpus_spec,
    generate_corpus,
    generate_fixture,
)
from headeval.manifest import load_manifest
from headeval.metrics import evaluate_video


def spec_with(**kwargs) -> FixtureSpec:
    base = dict(video_id="fx", n_frames=100, fps=25.0, seed=11)
    base.update(kwargs)
    return FixtureSpec(**base)


class TestGeneratedBundles:
    def test_bundle_passes_validation(self, topo):
        bundle, _ = build_fixture_bundle(spec_with(silent_lip_jitter=0.05,
                                                   translation_jitter_var=2.0), topo)
        assert validate_bundle(bundle, topo).ok

    def test_generation_is_deterministic(self, topo):
        a, audio_a = build_fixture_bundle(spec_with(), topo)
        b, audio_b = build_fixture_bundle(spec_with(), topo)
        assert np.array_equal(audio_a, audio_b)
        assert np.array_equal(a.landmarks[7].points, b.landmarks[7].points)
        assert a.pose == b.pose

    def test_written_directory_loads_back(self, tmp_path, topo):
        out = generate_fixture(spec_with(), tmp_path / "fx", topo)
        bundle = load_feature_bundle(out, topo)
        assert bundle.n_frames == 100
        assert bundle.audio_volume is not None
        meta = json.loads((out / "meta.json").read_text())
        assert meta["fixture"]["seed"] == 11

    def test_overwrite_guard(self, tmp_path, topo):
        generate_fixture(spec_with(), tmp_path / "fx", topo)
        with pytest.raises(FileExistsError):
            generate_fixture(spec_with(), tmp_path / "fx", topo)
        generate_fixture(spec_with(), tmp_path / "fx", topo, overwrite=True)

    def test_invalid_schedule_rejected(self):
        with pytest.raises(ValueError, match="schedule"):
            spec_with(speech_schedule=((0.0, 99.0, True),))

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            spec_with(lip_amplitude=-0.1)


class TestMetricBehaviors:
    def test_static_spec_zeroes_all_dynamics(self, topo):
        static = spec_with(lip_amplitude=0.0, silent_lip_jitter=0.0,
                           head_profile="static", translation_jitter_var=0.0,
                           brow_amplitude=0.0)
        bundle, _ = build_fixture_bundle(static, topo)
        vec = evaluate_video(bundle, topo)
        assert vec.lip_dynamics == 0.0
        assert vec.head_motion_dynamics == 0.0
        assert vec.eyebrow_dynamics == 0.0
        assert vec.silent_lip_stability == 0.0

    def test_lip_amplitude_doubling_doubles_dynamics(self, tmp_path, topo):
        values = []
        for i, amp in enumerate((0.2, 0.4)):
            out = generate_fixture(spec_with(lip_amplitude=amp, silent_lip_jitter=0.0),
                                   tmp_path / f"amp{i}", topo)
            bundle = load_feature_bundle(out, topo)
            values.append(evaluate_video(bundle, topo).lip_dynamics)
        assert values[1] == pytest.approx(2.0 * values[0], rel=1e-6)

    def test_sync_lag_raises_lip_sync(self, topo):
        for seed in range(5):
            by_lag = {}
            for lag in (0, 5):
                bundle, _ = build_fixture_bundle(
                    spec_with(seed=seed, sync_lag_frames=lag), topo)
                by_lag[lag] = evaluate_video(bundle, topo).lip_sync
            assert by_lag[0] < by_lag[5], seed

    def test_amplitude_sweeps_strictly_increase(self, topo):
        def metric_for(name, **kwargs):
            bundle, _ = build_fixture_bundle(spec_with(**kwargs), topo)
            return getattr(evaluate_video(bundle, topo), name)

        lips = [metric_for("lip_dynamics", lip_amplitude=a) for a in (0.1, 0.2, 0.4)]
        heads = [metric_for("head_motion_dynamics", head_amplitude_deg=a)
                 for a in (2.0, 4.0, 8.0)]
        brows = [metric_for("eyebrow_dynamics", brow_amplitude=a)
                 for a in (0.05, 0.1, 0.2)]
        wobble = [metric_for("silent_lip_stability", silent_lip_jitter=a)
                  for a in (0.02, 0.05, 0.1)]
        for seq in (lips, heads, brows, wobble):
            assert seq[0] < seq[1] < seq[2], seq

    def test_linear_head_profile_scores_zero(self, topo):
        bundle, _ = build_fixture_bundle(
            spec_with(head_profile="linear", translation_jitter_var=0.0), topo)
        assert evaluate_video(bundle, topo).head_motion_dynamics == pytest.approx(0.0, abs=1e-9)


class TestCorpus:
    def test_demo_corpus_layout(self, tmp_path):
        out = generate_corpus(demo_corpus_spec(n_videos=2, n_frames=60), tmp_path / "c")
        manifest = load_manifest(out / "manifest.json")
        assert manifest.video_ids == ("vid_000", "vid_001")
        assert set(manifest.model_dirs) == {"damped", "jittery"}
        assert manifest.topology_path is not None
        bundle = load_feature_bundle(out / "ground_truth" / "vid_000",
                                     build_fixture_topology())
        assert bundle.video_id == "vid_000"

    def test_corpus_requires_ground_truth(self):
        with pytest.raises(ValueError, match="ground_truth"):
            CorpusSpec(models={"only": (spec_with(),)})

    def test_corpus_video_sets_must_match(self):
        with pytest.raises(ValueError, match="video ids"):
            CorpusSpec(models={
                "ground_truth": (spec_with(video_id="a"),),
                "m": (spec_with(video_id="b"),),
            })

    def test_spec_round_trip_from_dict(self):
        original = spec_with(speech_schedule=((0.0, 2.0, True), (2.0, 4.0, False)),
                             iqa_base=(0.5, 0.6, 0.7))
        raw = json.loads(json.dumps(dataclasses.asdict(original)))
        assert FixtureSpec.from_dict(raw) == original
