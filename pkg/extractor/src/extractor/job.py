"""Extraction job: raw video in, canonical feature directory out.

The output conforms to the evaluation engine's feature-directory schema
(landmarks.jsonl, pose.jsonl, iqa.jsonl, vad.json, audio.wav, meta.json,
plus the corpus-level topology.json). The directory is written to a
temporary sibling and renamed into place so consumers never observe a
half-written job.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import tempfile
import wave
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .backends import (
    IQA_BACKENDS,
    LANDMARK_BACKENDS,
    POSE_BACKENDS,
    VAD_BACKENDS,
    build,
)
from .crop import DegenerateCropError, crop_regions
from .topology import TOPOLOGY, write_topology


class ExtractionError(RuntimeError):
    pass


class CoverageError(ExtractionError):
    """A face was found in too few frames to produce usable statistics."""


@dataclass
class ExtractionJob:
    input_video: Path
    output_dir: Path
    landmark_backend: str = "classical"
    pose_backend: str = "classical"
    iqa_backend: str = "classical"
    vad_backend: str = "energy"
    device: str = "cpu"
    min_coverage: float = 0.5
    crop_margin: float = 0.2
    overwrite: bool = False
    audio_sidecar: Path | None = None  # explicit wav next to the video
    notes: dict = field(default_factory=dict)


def _read_sidecar_wav(path: Path) -> tuple[np.ndarray, int]:
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1 or wav.getsampwidth() != 2:
            raise ExtractionError(f"{path}: sidecar audio must be PCM 16-bit mono")
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0, rate


def _extract_audio(job: ExtractionJob, tmp: Path) -> tuple[np.ndarray, int] | None:
    """Sidecar wav first; otherwise ffmpeg when present; otherwise no audio."""
    sidecar = job.audio_sidecar or job.input_video.with_suffix(".wav")
    if sidecar.is_file():
        return _read_sidecar_wav(sidecar)
    ffmpeg = shutil.which("ffmpeg")
    if ffmpeg is None:
        return None
    target = tmp / "extracted.wav"
    result = subprocess.run(
        [ffmpeg, "-y", "-i", str(job.input_video), "-vn", "-ac", "1",
         "-ar", "16000", "-sample_fmt", "s16", str(target)],
        capture_output=True,
    )
    if result.returncode != 0 or not target.is_file():
        return None  # e.g. the container has no audio stream
    return _read_sidecar_wav(target)


def _write_wav(path: Path, samples: np.ndarray, sample_rate: int) -> None:
    pcm = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(pcm.tobytes())


def extract_features(job: ExtractionJob) -> Path:
    """Run all backends over the video and write the feature directory."""
    if not job.input_video.is_file():
        raise ExtractionError(f"input video not found: {job.input_video}")
    if job.output_dir.exists() and any(job.output_dir.iterdir()) and not job.overwrite:
        raise ExtractionError(f"{job.output_dir} exists and is not empty")

    landmarks = build(LANDMARK_BACKENDS, job.landmark_backend)
    pose = build(POSE_BACKENDS, job.pose_backend)
    iqa = build(IQA_BACKENDS, job.iqa_backend)
    vad = build(VAD_BACKENDS, job.vad_backend)

    cap = cv2.VideoCapture(str(job.input_video))
    if not cap.isOpened():
        raise ExtractionError(f"could not open video: {job.input_video}")
    fps = cap.get(cv2.CAP_PROP_FPS) or 25.0

    landmark_rows: list[dict] = []
    pose_rows: list[dict] = []
    iqa_rows: list[dict] = []
    detected = 0
    frame_index = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        observation = landmarks.detect(frame)
        timestamp = frame_index / fps
        if observation.detected:
            detected += 1
            pts = observation.points
            landmark_rows.append({
                "frame_index": frame_index,
                "timestamp_s": timestamp,
                "detection_ok": True,
                "points": [[float(px), float(py)] for px, py in pts],
            })
            aesthetic = iqa.aesthetic(frame)
            try:
                face_crop, mouth_crop = crop_regions(
                    frame, pts, TOPOLOGY["lip_indices"], job.crop_margin)
                face_q = iqa.crop_quality(face_crop)
                mouth_q = iqa.crop_quality(mouth_crop)
            except DegenerateCropError:
                face_q = mouth_q = None
            iqa_rows.append({
                "frame_index": frame_index,
                "aesthetic": aesthetic,
                "face_quality": face_q,
                "mouth_quality": mouth_q,
            })
        else:
            height, width = frame.shape[:2]
            filler = [[0.0, 0.0]] * TOPOLOGY["total_points"]
            landmark_rows.append({
                "frame_index": frame_index,
                "timestamp_s": timestamp,
                "detection_ok": False,
                "points": filler,
            })
            iqa_rows.append({
                "frame_index": frame_index,
                "aesthetic": None, "face_quality": None, "mouth_quality": None,
            })
        pitch, yaw, roll, cx, cy = pose.estimate(observation)
        pose_rows.append({
            "frame_index": frame_index,
            "pitch_deg": pitch, "yaw_deg": yaw, "roll_deg": roll,
            "center_x": cx, "center_y": cy,
        })
        frame_index += 1
    cap.release()

    if frame_index == 0:
        raise ExtractionError(f"no frames decoded from {job.input_video}")
    coverage = detected / frame_index
    if coverage < job.min_coverage:
        raise CoverageError(
            f"face detected in {detected}/{frame_index} frames "
            f"({coverage:.0%}), below the {job.min_coverage:.0%} floor")

    job.output_dir.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=job.output_dir.parent) as tmp_name:
        tmp = Path(tmp_name)
        audio = _extract_audio(job, tmp)

        stage = tmp / "stage"
        stage.mkdir()
        with (stage / "landmarks.jsonl").open("w", encoding="utf-8") as fh:
            for row in landmark_rows:
                fh.write(json.dumps(row) + "\n")
        with (stage / "pose.jsonl").open("w", encoding="utf-8") as fh:
            for row in pose_rows:
                fh.write(json.dumps(row) + "\n")
        with (stage / "iqa.jsonl").open("w", encoding="utf-8") as fh:
            for row in iqa_rows:
                fh.write(json.dumps(row) + "\n")

        if audio is not None:
            samples, rate = audio
            segments = vad.segment(samples, rate)
            _write_wav(stage / "audio.wav", samples, rate)
        else:
            segments = []
        (stage / "vad.json").write_text(
            json.dumps({"segments": segments}, indent=2) + "\n", encoding="utf-8")

        meta = {
            "video_id": job.input_video.stem,
            "fps": float(fps),
            "n_frames": frame_index,
            "source": job.input_video.name,
            "backends": {
                "landmarks": job.landmark_backend,
                "pose": job.pose_backend,
                "iqa": job.iqa_backend,
                "vad": job.vad_backend,
            },
            "score_rescaling": "all IQA scores squashed/min-max mapped into [0, 1]",
            "detection_coverage": coverage,
            "crop_margin": job.crop_margin,
        }
        meta.update(job.notes)
        (stage / "meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        write_topology(stage / "topology.json")

        if job.output_dir.exists():
            shutil.rmtree(job.output_dir)
        stage.replace(job.output_dir)
    return job.output_dir
