"""Canonical per-video feature bundle: types, file I/O, and validation.

A feature directory holds one file per signal, all UTF-8 keyed text records:

* ``landmarks.jsonl`` — one JSON object per frame: ``frame_index``,
  ``timestamp_s``, ``detection_ok``, ``points`` (list of [x, y] pixels).
* ``pose.jsonl`` — per frame: ``frame_index``, ``pitch_deg``, ``yaw_deg``,
  ``roll_deg``, ``center_x``, ``center_y``.
* ``iqa.jsonl`` (optional) — per frame: ``frame_index``, ``aesthetic``,
  ``face_quality``, ``mouth_quality`` (each a unit-interval score or null).
* ``vad.json`` (optional) — ``{"segments": [{"start_s", "end_s", "is_speech"}, ...]}``;
  when absent, consumers may fall back to energy-based segmentation.
* ``audio.wav`` (optional) — PCM 16-bit mono.
* ``meta.json`` — ``video_id``, ``fps``, ``n_frames``.

Loading is strict about structure (malformed records raise with file, line,
and field); semantic invariants are reported by ``validate_bundle`` as data,
not exceptions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .topology import FaceTopology

LANDMARKS_FILE = "landmarks.jsonl"
POSE_FILE = "pose.jsonl"
IQA_FILE = "iqa.jsonl"
VAD_FILE = "vad.json"
AUDIO_FILE = "audio.wav"
META_FILE = "meta.json"


class FeatureFormatError(ValueError):
    """Malformed feature file; message carries file, line, and field."""

    def __init__(self, file: str, line: int | None, field_name: str | None, message: str):
        location = file if line is None else f"{file}:{line}"
        if field_name:
            location = f"{location} field '{field_name}'"
        super().__init__(f"{location}: {message}")
        self.file = file
        self.line = line
        self.field = field_name


@dataclass(frozen=True)
class LandmarkFrame:
    frame_index: int
    timestamp_s: float
    points: np.ndarray  # (K, 2) float64, read-only
    detection_ok: bool

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (K, 2), got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class PoseFrame:
    frame_index: int
    pitch_deg: float
    yaw_deg: float
    roll_deg: float
    center_x: float
    center_y: float


@dataclass(frozen=True)
class IqaFrame:
    frame_index: int
    aesthetic: float | None = None
    face_quality: float | None = None
    mouth_quality: float | None = None


@dataclass(frozen=True)
class VadSegment:
    start_s: float
    end_s: float
    is_speech: bool

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class FeatureBundle:
    """All per-frame signals for one video, immutable after load."""

    video_id: str
    fps: float
    landmarks: tuple[LandmarkFrame, ...]
    pose: tuple[PoseFrame, ...]
    iqa: tuple[IqaFrame, ...] | None
    vad: tuple[VadSegment, ...]
    audio_volume: np.ndarray | None = None  # per-frame RMS, length N

    def __post_init__(self) -> None:
        if self.audio_volume is not None:
            vol = np.asarray(self.audio_volume, dtype=np.float64)
            vol.setflags(write=False)
            object.__setattr__(self, "audio_volume", vol)

    @property
    def n_frames(self) -> int:
        return len(self.landmarks)


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    n_frames: int = 0
    detection_failures: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, location: str, message: str) -> None:
        self.violations.append(Violation(location, message))

    def render(self) -> str:
        lines = [
            f"frames: {self.n_frames}",
            f"detection failures: {self.detection_failures}",
            f"violations: {len(self.violations)}",
        ]
        lines.extend(f"  {v}" for v in self.violations)
        return "\n".join(lines)


def _require(record: dict, key: str, file: str, line: int):
    if key not in record:
        raise FeatureFormatError(file, line, key, "missing required field")
    return record[key]


def _as_number(value, file: str, line: int, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FeatureFormatError(file, line, field_name, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value, file: str, line: int, field_name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FeatureFormatError(file, line, field_name, f"expected an integer, got {value!r}")
    return value


def _iter_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FeatureFormatError(path.name, lineno, None, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise FeatureFormatError(path.name, lineno, None, "record must be a JSON object")
            yield lineno, record


def _load_landmarks(path: Path, topology: FaceTopology | None) -> tuple[LandmarkFrame, ...]:
    frames = []
    for lineno, record in _iter_jsonl(path):
        raw_points = _require(record, "points", path.name, lineno)
        if not isinstance(raw_points, list):
            raise FeatureFormatError(path.name, lineno, "points", "expected a list of [x, y] pairs")
        pts = []
        for pt in raw_points:
            if not (isinstance(pt, list) and len(pt) == 2):
                raise FeatureFormatError(path.name, lineno, "points", f"bad point {pt!r}")
            pts.append((
                _as_number(pt[0], path.name, lineno, "points.x"),
                _as_number(pt[1], path.name, lineno, "points.y"),
            ))
        frame_index = _as_int(_require(record, "frame_index", path.name, lineno),
                              path.name, lineno, "frame_index")
        if topology is not None and len(pts) != topology.total_points:
            raise FeatureFormatError(
                path.name, lineno, "points",
                f"frame {frame_index} has {len(pts)} points, topology declares "
                f"{topology.total_points}",
            )
        frames.append(LandmarkFrame(
            frame_index=frame_index,
            timestamp_s=_as_number(_require(record, "timestamp_s", path.name, lineno),
                                   path.name, lineno, "timestamp_s"),
            points=np.array(pts, dtype=np.float64).reshape(len(pts), 2),
            detection_ok=bool(_require(record, "detection_ok", path.name, lineno)),
        ))
    return tuple(frames)


def _load_pose(path: Path) -> tuple[PoseFrame, ...]:
    frames = []
    for lineno, record in _iter_jsonl(path):
        frames.append(PoseFrame(
            frame_index=_as_int(_require(record, "frame_index", path.name, lineno),
                                path.name, lineno, "frame_index"),
            pitch_deg=_as_number(_require(record, "pitch_deg", path.name, lineno),
                                 path.name, lineno, "pitch_deg"),
            yaw_deg=_as_number(_require(record, "yaw_deg", path.name, lineno),
                               path.name, lineno, "yaw_deg"),
            roll_deg=_as_number(_require(record, "roll_deg", path.name, lineno),
                                path.name, lineno, "roll_deg"),
            center_x=_as_number(_require(record, "center_x", path.name, lineno),
                                path.name, lineno, "center_x"),
            center_y=_as_number(_require(record, "center_y", path.name, lineno),
                                path.name, lineno, "center_y"),
        ))
    return tuple(frames)


def _load_iqa(path: Path) -> tuple[IqaFrame, ...]:
    frames = []
    for lineno, record in _iter_jsonl(path):
        def score(key: str):
            value = record.get(key)
            if value is None:
                return None
            return _as_number(value, path.name, lineno, key)

        frames.append(IqaFrame(
            frame_index=_as_int(_require(record, "frame_index", path.name, lineno),
                                path.name, lineno, "frame_index"),
            aesthetic=score("aesthetic"),
            face_quality=score("face_quality"),
            mouth_quality=score("mouth_quality"),
        ))
    return tuple(frames)


def _load_vad(path: Path) -> tuple[VadSegment, ...]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FeatureFormatError(path.name, None, None, f"invalid JSON: {exc}") from exc
    segments_raw = raw.get("segments") if isinstance(raw, dict) else None
    if not isinstance(segments_raw, list):
        raise FeatureFormatError(path.name, None, "segments", "expected a list of segments")
    segments = []
    for i, seg in enumerate(segments_raw):
        if not isinstance(seg, dict):
            raise FeatureFormatError(path.name, None, f"segments[{i}]", "expected an object")
        segments.append(VadSegment(
            start_s=_as_number(seg.get("start_s"), path.name, None, f"segments[{i}].start_s"),
            end_s=_as_number(seg.get("end_s"), path.name, None, f"segments[{i}].end_s"),
            is_speech=bool(seg.get("is_speech")),
        ))
    return tuple(segments)


def load_feature_bundle(dir_path: str | Path, topology: FaceTopology | None = None) -> FeatureBundle:
    """Load a canonical feature directory into a validated-shape bundle.

    Structural problems (missing required files, malformed records, frame
    count mismatches, topology size mismatches) raise ``FeatureFormatError``.
    Missing optional files leave their fields absent. Audio, when present,
    is reduced to the per-frame RMS volume series.
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise FeatureFormatError(str(dir_path), None, None, "feature directory not found")

    meta_path = dir_path / META_FILE
    if not meta_path.is_file():
        raise FeatureFormatError(META_FILE, None, None, f"missing in {dir_path}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FeatureFormatError(META_FILE, None, None, f"invalid JSON: {exc}") from exc
    video_id = meta.get("video_id")
    if not isinstance(video_id, str) or not video_id:
        raise FeatureFormatError(META_FILE, None, "video_id", "must be a non-empty string")
    fps = _as_number(meta.get("fps"), META_FILE, None, "fps")
    n_frames = _as_int(meta.get("n_frames"), META_FILE, None, "n_frames")

    for required in (LANDMARKS_FILE, POSE_FILE):
        if not (dir_path / required).is_file():
            raise FeatureFormatError(required, None, None, f"missing in {dir_path}")

    landmarks = _load_landmarks(dir_path / LANDMARKS_FILE, topology)
    pose = _load_pose(dir_path / POSE_FILE)
    iqa_path = dir_path / IQA_FILE
    iqa = _load_iqa(iqa_path) if iqa_path.is_file() else None
    vad_path = dir_path / VAD_FILE
    vad = _load_vad(vad_path) if vad_path.is_file() else ()

    counts = {LANDMARKS_FILE: len(landmarks), POSE_FILE: len(pose), META_FILE: n_frames}
    if iqa is not None:
        counts[IQA_FILE] = len(iqa)
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{name}={count}" for name, count in sorted(counts.items()))
        raise FeatureFormatError(str(dir_path), None, None, f"frame count mismatch: {detail}")

    audio_volume = None
    audio_path = dir_path / AUDIO_FILE
    if audio_path.is_file():
        from .audio import frame_rms, read_wav

        samples, sample_rate = read_wav(audio_path)
        audio_volume = frame_rms(samples, sample_rate, fps, n_frames).values

    return FeatureBundle(
        video_id=video_id,
        fps=fps,
        landmarks=landmarks,
        pose=pose,
        iqa=iqa,
        vad=vad,
        audio_volume=audio_volume,
    )


def write_feature_bundle(
    dir_path: str | Path,
    bundle: FeatureBundle,
    audio: tuple[np.ndarray, int] | None = None,
    meta_extra: dict | None = None,
) -> None:
    """Write a bundle back to the canonical directory layout.

    ``audio`` is (samples, sample_rate) for ``audio.wav``; the bundle itself
    only carries the derived volume series, so raw audio is supplied by the
    caller (e.g. the fixture generator).
    """
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)

    with (dir_path / LANDMARKS_FILE).open("w", encoding="utf-8") as fh:
        for frame in bundle.landmarks:
            fh.write(json.dumps({
                "frame_index": frame.frame_index,
                "timestamp_s": frame.timestamp_s,
                "detection_ok": frame.detection_ok,
                "points": [[float(x), float(y)] for x, y in frame.points],
            }) + "\n")

    with (dir_path / POSE_FILE).open("w", encoding="utf-8") as fh:
        for pframe in bundle.pose:
            fh.write(json.dumps({
                "frame_index": pframe.frame_index,
                "pitch_deg": pframe.pitch_deg,
                "yaw_deg": pframe.yaw_deg,
                "roll_deg": pframe.roll_deg,
                "center_x": pframe.center_x,
                "center_y": pframe.center_y,
            }) + "\n")

    if bundle.iqa is not None:
        with (dir_path / IQA_FILE).open("w", encoding="utf-8") as fh:
            for iframe in bundle.iqa:
                fh.write(json.dumps({
                    "frame_index": iframe.frame_index,
                    "aesthetic": iframe.aesthetic,
                    "face_quality": iframe.face_quality,
                    "mouth_quality": iframe.mouth_quality,
                }) + "\n")

    (dir_path / VAD_FILE).write_text(json.dumps({
        "segments": [
            {"start_s": seg.start_s, "end_s": seg.end_s, "is_speech": seg.is_speech}
            for seg in bundle.vad
        ]
    }, indent=2) + "\n", encoding="utf-8")

    meta = {"video_id": bundle.video_id, "fps": bundle.fps, "n_frames": bundle.n_frames}
    if meta_extra:
        meta.update(meta_extra)
    (dir_path / META_FILE).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    if audio is not None:
        from .audio import write_wav

        samples, sample_rate = audio
        write_wav(dir_path / AUDIO_FILE, samples, sample_rate)


def validate_bundle(bundle: FeatureBundle, topology: FaceTopology | None = None) -> ValidationReport:
    """Check every semantic invariant; violations are data, not errors.

    An empty report means the bundle satisfies all invariants. Frames with
    ``detection_ok = False`` are not violations; they are counted so reports
    surface how much of the video the statistics actually cover.
    """
    report = ValidationReport(n_frames=bundle.n_frames)

    if not (math.isfinite(bundle.fps) and bundle.fps > 0):
        report.add("meta", f"fps must be finite and positive, got {bundle.fps}")
    if bundle.n_frames < 1:
        report.add("meta", "bundle must contain at least one frame")

    counts = {"landmarks": len(bundle.landmarks), "pose": len(bundle.pose)}
    if bundle.iqa is not None:
        counts["iqa"] = len(bundle.iqa)
    if bundle.audio_volume is not None:
        counts["audio_volume"] = len(bundle.audio_volume)
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        report.add("bundle", f"signal frame counts differ: {detail}")

    point_count = None
    prev_ts = None
    for i, frame in enumerate(bundle.landmarks):
        loc = f"landmarks frame {i}"
        if frame.frame_index != i:
            report.add(loc, f"frame_index {frame.frame_index} != position {i}")
        if point_count is None:
            point_count = frame.points.shape[0]
        elif frame.points.shape[0] != point_count:
            report.add(loc, f"point count {frame.points.shape[0]} != {point_count} of frame 0")
        if topology is not None and frame.points.shape[0] != topology.total_points:
            report.add(loc, f"point count {frame.points.shape[0]} != topology "
                            f"{topology.total_points}")
        if not np.all(np.isfinite(frame.points)):
            report.add(loc, "non-finite coordinates")
        if not math.isfinite(frame.timestamp_s) or frame.timestamp_s < 0:
            report.add(loc, f"bad timestamp {frame.timestamp_s}")
        elif prev_ts is not None and frame.timestamp_s <= prev_ts:
            report.add(loc, f"timestamp {frame.timestamp_s} not strictly increasing")
        prev_ts = frame.timestamp_s if math.isfinite(frame.timestamp_s) else prev_ts
        if not frame.detection_ok:
            report.detection_failures += 1

    for i, pframe in enumerate(bundle.pose):
        loc = f"pose frame {i}"
        if pframe.frame_index != i:
            report.add(loc, f"frame_index {pframe.frame_index} != position {i}")
        for name, angle in (("pitch_deg", pframe.pitch_deg), ("yaw_deg", pframe.yaw_deg),
                            ("roll_deg", pframe.roll_deg)):
            if not math.isfinite(angle):
                report.add(loc, f"{name} not finite")
            elif abs(angle) > 180.0:
                report.add(loc, f"|{name}| = {abs(angle)} exceeds 180")
        for name, coord in (("center_x", pframe.center_x), ("center_y", pframe.center_y)):
            if not math.isfinite(coord):
                report.add(loc, f"{name} not finite")

    if bundle.iqa is not None:
        for i, iframe in enumerate(bundle.iqa):
            loc = f"iqa frame {i}"
            if iframe.frame_index != i:
                report.add(loc, f"frame_index {iframe.frame_index} != position {i}")
            for name, score in (("aesthetic", iframe.aesthetic),
                                ("face_quality", iframe.face_quality),
                                ("mouth_quality", iframe.mouth_quality)):
                if score is None:
                    continue
                if not math.isfinite(score) or not 0.0 <= score <= 1.0:
                    report.add(loc, f"{name} = {score} outside [0, 1]")

    prev_end = None
    for i, seg in enumerate(bundle.vad):
        loc = f"vad segment {i}"
        if not (math.isfinite(seg.start_s) and math.isfinite(seg.end_s)):
            report.add(loc, "non-finite boundary")
            continue
        if seg.start_s >= seg.end_s:
            report.add(loc, f"start {seg.start_s} >= end {seg.end_s}")
        if prev_end is not None and seg.start_s < prev_end:
            report.add(loc, f"overlaps previous segment (starts {seg.start_s} "
                            f"before {prev_end})")
        prev_end = max(seg.end_s, prev_end) if prev_end is not None else seg.end_s

    if bundle.audio_volume is not None:
        vol = np.asarray(bundle.audio_volume)
        if not np.all(np.isfinite(vol)):
            report.add("audio_volume", "non-finite values")
        if np.any(vol < 0):
            report.add("audio_volume", "negative values")

    return report


def sorted_segments(segments: Sequence[VadSegment]) -> tuple[VadSegment, ...]:
    return tuple(sorted(segments, key=lambda s: (s.start_s, s.end_s)))
