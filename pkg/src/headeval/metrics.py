"""The eight per-video metrics, plus reference-based landmark distance.

Conventions shared by every metric:

* Standard deviations and variances are sample statistics (N-1 denominator).
* Frames with failed landmark detection (or degenerate eye geometry) are
  dropped from the frame population, never interpolated.
* A metric that cannot be computed for a video (no IQA scores, no silent
  frames, fewer than two usable frames, ...) is *inapplicable* and reported
  as ``None``, so one missing signal never aborts the rest of the vector.

Raw values for ``silent_lip_stability``, ``lip_sync``, and ``lmd`` are
lower-is-better; the scoring module's ground-truth normalization turns them
into the higher-is-better scores shown on leaderboards.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Literal, Sequence

import numpy as np

from . import geometry
from .audio import FrameSets, FrameVolumeSeries, derive_frame_sets, energy_vad_fallback
from .features import FeatureBundle, IqaFrame, LandmarkFrame, PoseFrame
from .topology import FaceTopology

LIP_SYNC_EPSILON = 1e-8

METRIC_NAMES = (
    "global_aesthetics",
    "mouth_quality",
    "face_quality",
    "lip_dynamics",
    "head_motion_dynamics",
    "eyebrow_dynamics",
    "silent_lip_stability",
    "lip_sync",
)

#: Dimension membership; leaderboards group columns in this order.
DIMENSIONS = {
    "quality": ("global_aesthetics", "mouth_quality", "face_quality"),
    "synchronization": ("silent_lip_stability", "lip_sync"),
    "naturalness": ("lip_dynamics", "head_motion_dynamics", "eyebrow_dynamics"),
}

#: Metrics whose raw value decreases as behavior improves.
LOWER_IS_BETTER = ("silent_lip_stability", "lip_sync")


@dataclass(frozen=True)
class MetricVector:
    """The eight raw metric values for one video; ``None`` = inapplicable."""

    global_aesthetics: float | None = None
    mouth_quality: float | None = None
    face_quality: float | None = None
    lip_dynamics: float | None = None
    head_motion_dynamics: float | None = None
    eyebrow_dynamics: float | None = None
    silent_lip_stability: float | None = None
    lip_sync: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def applicable(self, name: str) -> bool:
        return getattr(self, name) is not None

    @classmethod
    def from_dict(cls, values: dict[str, float | None]) -> "MetricVector":
        unknown = set(values) - set(METRIC_NAMES)
        if unknown:
            raise ValueError(f"unknown metric names: {sorted(unknown)}")
        return cls(**values)


def _sample_std(values: np.ndarray) -> float:
    # Shifting by the first element is an identity for the standard
    # deviation but keeps constant inputs at exactly zero.
    return float(np.std(values - values[0], ddof=1))


def _sample_var(values: np.ndarray) -> float:
    # A single observation carries no variability information; treating its
    # variance as 0 keeps two-frame videos scoreable.
    if values.size < 2:
        return 0.0
    return float(np.var(values - values[0], ddof=1))


def _mean_scores(iqa: Sequence[IqaFrame] | None, field: str) -> float | None:
    if iqa is None:
        return None
    scores = [getattr(f, field) for f in iqa if getattr(f, field) is not None]
    if not scores:
        return None
    return float(np.mean(scores))


def global_aesthetics(iqa: Sequence[IqaFrame] | None) -> float | None:
    """Mean per-frame aesthetic score; ``None`` when no frame is scored."""
    return _mean_scores(iqa, "aesthetic")


def face_quality(iqa: Sequence[IqaFrame] | None) -> float | None:
    """Mean per-frame face-region quality score."""
    return _mean_scores(iqa, "face_quality")


def mouth_quality(iqa: Sequence[IqaFrame] | None) -> float | None:
    """Mean per-frame mouth-region quality score."""
    return _mean_scores(iqa, "mouth_quality")


def lip_dynamics(landmarks: Sequence[LandmarkFrame], topo: FaceTopology) -> float | None:
    """Variability of lip shape over time.

    For each configured lip pair, take the sample standard deviation of its
    distance across the usable frames; return the mean over pairs. Needs at
    least two usable frames.
    """
    matrix = geometry.lip_pair_matrix(landmarks, topo)
    valid = matrix[~np.isnan(matrix).any(axis=1)]
    if valid.shape[0] < 2:
        return None
    return float(np.mean(np.std(valid - valid[0], axis=0, ddof=1)))


def head_motion_dynamics(pose: Sequence[PoseFrame]) -> float | None:
    """Combined range, velocity-variability, and positional jitter of the head.

    With per-frame pitch/yaw/roll angles and face-center coordinates:
    the mean of the three angle standard deviations is multiplied by the
    mean variance of the angles' first differences, the mean variance of
    the center coordinates is added, and the square root is returned.
    A constant-velocity head (linear angles, fixed center) scores exactly 0.
    """
    if len(pose) < 2:
        return None
    angles = np.array([[p.pitch_deg, p.yaw_deg, p.roll_deg] for p in pose])
    centers = np.array([[p.center_x, p.center_y] for p in pose])
    angles = angles - angles[0]
    centers = centers - centers[0]
    mean_angle_std = float(np.mean([_sample_std(angles[:, k]) for k in range(3)]))
    deltas = np.diff(angles, axis=0)
    mean_delta_var = float(np.mean([_sample_var(deltas[:, k]) for k in range(3)]))
    mean_trans_var = float(np.mean([_sample_var(centers[:, k]) for k in range(2)]))
    return float(np.sqrt(mean_angle_std * mean_delta_var + mean_trans_var))


def eyebrow_dynamics(landmarks: Sequence[LandmarkFrame], topo: FaceTopology) -> float | None:
    """Sample standard deviation of the normalized brow-eye distance."""
    signal = geometry.brow_signal(landmarks, topo).values
    valid = signal[np.isfinite(signal)]
    if valid.size < 2:
        return None
    return _sample_std(valid)


def silent_lip_stability(
    landmarks: Sequence[LandmarkFrame], topo: FaceTopology, frames: FrameSets
) -> float | None:
    """Median absolute deviation of the lip gap over qualifying silent frames.

    Lower raw values mean a steadier mouth during silence. Inapplicable when
    no silent frame carries a valid lip measurement.
    """
    gaps = geometry.lip_gap_signal(landmarks, topo).values
    silent = np.asarray(frames.silent_frames, dtype=np.intp)
    if silent.size == 0:
        return None
    values = gaps[silent]
    values = values[np.isfinite(values)]
    if values.size == 0:
        return None
    return float(np.median(np.abs(values - np.median(values))))


def lip_sync(
    openness: geometry.ScalarSignal,
    volume: FrameVolumeSeries,
    frames: FrameSets,
    epsilon: float = LIP_SYNC_EPSILON,
) -> float | None:
    """Mean absolute gap between normalized mouth openness and audio volume.

    Both signals are min-max normalized over the speech frames, with
    ``epsilon`` added to each denominator to tolerate constant signals.
    The result lies in [0, 1]; lower raw values mean tighter sync.
    """
    speech = np.asarray(frames.speech_frames, dtype=np.intp)
    if speech.size == 0:
        return None
    o = np.asarray(openness.values)[speech]
    v = np.asarray(volume.values)[speech]
    usable = np.isfinite(o) & np.isfinite(v)
    o, v = o[usable], v[usable]
    if o.size == 0:
        return None
    o_norm = (o - o.min()) / (o.max() - o.min() + epsilon)
    v_norm = (v - v.min()) / (v.max() - v.min() + epsilon)
    return float(np.mean(np.abs(o_norm - v_norm)))


def lmd(
    landmarks_a: Sequence[LandmarkFrame],
    landmarks_b: Sequence[LandmarkFrame],
    topo: FaceTopology,
    region: Literal["face", "mouth"] = "face",
) -> float:
    """Mean per-point Euclidean distance between two landmark sequences.

    ``region`` selects all points or just the lip set. Frames where either
    sequence failed detection are skipped. Raw pixels, lower is better.
    """
    if len(landmarks_a) != len(landmarks_b):
        raise ValueError(
            f"sequence length mismatch: {len(landmarks_a)} vs {len(landmarks_b)}"
        )
    if region == "face":
        idx = np.arange(topo.total_points, dtype=np.intp)
    elif region == "mouth":
        idx = np.asarray(topo.lip_indices, dtype=np.intp)
    else:
        raise ValueError(f"region must be 'face' or 'mouth', got {region!r}")
    per_frame = []
    for fa, fb in zip(landmarks_a, landmarks_b):
        if not (fa.detection_ok and fb.detection_ok):
            continue
        diff = fa.points[idx] - fb.points[idx]
        per_frame.append(np.hypot(diff[:, 0], diff[:, 1]).mean())
    if not per_frame:
        raise ValueError("no frame pair with detections on both sides")
    return float(np.mean(per_frame))


def frame_sets_for_bundle(
    bundle: FeatureBundle, min_silence_s: float = 0.3
) -> FrameSets:
    """Speech/silent frame sets from the bundle's VAD, with energy fallback.

    When the bundle has no VAD segments but does carry a volume series, the
    energy-based segmentation stands in.
    """
    vad = bundle.vad
    if not vad and bundle.audio_volume is not None:
        fallback = energy_vad_fallback(
            FrameVolumeSeries(values=bundle.audio_volume, fps=bundle.fps)
        )
        vad = fallback.segments
    return derive_frame_sets(vad, bundle.fps, bundle.n_frames, min_silence_s)


def evaluate_video(
    bundle: FeatureBundle, topo: FaceTopology, min_silence_s: float = 0.3
) -> MetricVector:
    """Compute the full metric vector for one video.

    Deterministic; missing signals surface as inapplicable entries rather
    than failures.
    """
    frames = frame_sets_for_bundle(bundle, min_silence_s)
    sync = None
    if bundle.audio_volume is not None:
        sync = lip_sync(
            geometry.openness_signal(bundle.landmarks, topo),
            FrameVolumeSeries(values=bundle.audio_volume, fps=bundle.fps),
            frames,
        )
    return MetricVector(
        global_aesthetics=global_aesthetics(bundle.iqa),
        mouth_quality=mouth_quality(bundle.iqa),
        face_quality=face_quality(bundle.iqa),
        lip_dynamics=lip_dynamics(bundle.landmarks, topo),
        head_motion_dynamics=head_motion_dynamics(bundle.pose),
        eyebrow_dynamics=eyebrow_dynamics(bundle.landmarks, topo),
        silent_lip_stability=silent_lip_stability(bundle.landmarks, topo, frames),
        lip_sync=sync,
    )
