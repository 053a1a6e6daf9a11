from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import render_clip, write_tone_wav
from extractor import CoverageError, ExtractionJob, extract_features
from extractor.backends import BackendUnavailable
from extractor.cli import main


def run_job(clip, out, **kwargs):
    return extract_features(ExtractionJob(input_video=clip, output_dir=out, **kwargs))


def test_extraction_passes_engine_validation(face_clip, tmp_path):
    out = run_job(face_clip, tmp_path / "features")
    result = subprocess.run(
        [sys.executable, "-m", "headeval.cli", "validate", str(out),
         "--topology", str(out / "topology.json")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stdout + result.stderr
    assert "violations: 0" in result.stdout


def test_all_iqa_scores_in_unit_interval(face_clip, tmp_path):
    out = run_job(face_clip, tmp_path / "features")
    scored = 0
    for line in (out / "iqa.jsonl").read_text().splitlines():
        row = json.loads(line)
        for key in ("aesthetic", "face_quality", "mouth_quality"):
            value = row[key]
            if value is not None:
                assert 0.0 <= value <= 1.0, (key, value)
                scored += 1
    assert scored > 0


def test_repeat_extraction_is_deterministic(face_clip, tmp_path):
    first = run_job(face_clip, tmp_path / "a")
    second = run_job(face_clip, tmp_path / "b")
    for name in ("landmarks.jsonl", "pose.jsonl", "iqa.jsonl", "vad.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_audio_free_video_yields_empty_vad_and_no_wav(face_clip, tmp_path):
    out = run_job(face_clip, tmp_path / "features")
    assert json.loads((out / "vad.json").read_text()) == {"segments": []}
    assert not (out / "audio.wav").exists()


def test_sidecar_audio_is_segmented_and_copied(tmp_path):
    clip = render_clip(tmp_path / "spoken.avi")
    write_tone_wav(tmp_path / "spoken.wav")
    out = run_job(clip, tmp_path / "features")
    assert (out / "audio.wav").is_file()
    segments = json.loads((out / "vad.json").read_text())["segments"]
    kinds = {seg["is_speech"] for seg in segments}
    assert kinds == {True, False}  # the tone half and the silent half
    result = subprocess.run(
        [sys.executable, "-m", "headeval.cli", "validate", str(out),
         "--topology", str(out / "topology.json")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stdout + result.stderr


def test_faceless_video_fails_with_coverage_report(tmp_path):
    clip = render_clip(tmp_path / "empty.avi", with_face=False)
    with pytest.raises(CoverageError, match="0%"):
        run_job(clip, tmp_path / "features")


def test_mouth_motion_reaches_the_landmarks(face_clip, tmp_path):
    out = run_job(face_clip, tmp_path / "features")
    gaps = []
    for line in (out / "landmarks.jsonl").read_text().splitlines():
        row = json.loads(line)
        if not row["detection_ok"]:
            continue
        upper = sum(p[1] for p in row["points"][0:20]) / 20
        lower = sum(p[1] for p in row["points"][20:40]) / 20
        gaps.append(lower - upper)
    assert max(gaps) > min(gaps)  # the opening/closing mouth is tracked


def test_overwrite_guard(face_clip, tmp_path):
    run_job(face_clip, tmp_path / "features")
    with pytest.raises(Exception, match="not empty"):
        run_job(face_clip, tmp_path / "features")
    run_job(face_clip, tmp_path / "features", overwrite=True)


def test_unavailable_backend_is_explicit(face_clip, tmp_path):
    with pytest.raises(BackendUnavailable):
        run_job(face_clip, tmp_path / "features", landmark_backend="mediapipe")
    with pytest.raises(BackendUnavailable, match="unknown backend"):
        run_job(face_clip, tmp_path / "features", vad_backend="imagined")


def test_cli_round_trip(face_clip, tmp_path, capsys):
    out = tmp_path / "features"
    assert main(["--input", str(face_clip), "--out", str(out)]) == 0
    assert (out / "meta.json").is_file()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["backends"]["landmarks"] == "classical"
    assert 0.0 <= meta["detection_coverage"] <= 1.0

    assert main(["--input", str(tmp_path / "missing.avi"), "--out", str(out)]) == 1
    assert "not found" in capsys.readouterr().err
