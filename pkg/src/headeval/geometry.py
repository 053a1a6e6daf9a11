"""Landmark-derived scalar signals: interocular distance, mouth openness,
lip pair distances, vertical lip gaps, eyebrow-eye distance.

All per-frame quantities normalize by the interocular distance where the
measure should be scale-free; vertical always means the image y-axis (no
roll correction). Eye and brow centers are index-set centroids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import LandmarkFrame
from .topology import FaceTopology


class DegenerateFaceError(ValueError):
    """Coincident eye centroids; interocular normalization is undefined."""


@dataclass(frozen=True)
class ScalarSignal:
    """One real value per frame; NaN marks frames without a valid value."""

    values: np.ndarray
    name: str

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


def _centroid(points: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    return points[np.asarray(indices, dtype=np.intp)].mean(axis=0)


def interocular_distance(frame: LandmarkFrame, topo: FaceTopology) -> float:
    """Euclidean distance between the left and right eye centroids."""
    left = _centroid(frame.points, topo.left_eye_indices)
    right = _centroid(frame.points, topo.right_eye_indices)
    dist = float(np.hypot(*(left - right)))
    if dist <= 0.0:
        raise DegenerateFaceError(
            f"frame {frame.frame_index}: eye centroids coincide, interocular distance is zero"
        )
    return dist


def mouth_openness(frame: LandmarkFrame, topo: FaceTopology) -> float:
    """Vertical gap between mean upper-lip and mean lower-lip positions,
    normalized by the interocular distance."""
    d_io = interocular_distance(frame, topo)
    upper_y = float(_centroid(frame.points, topo.upper_lip_indices)[1])
    lower_y = float(_centroid(frame.points, topo.lower_lip_indices)[1])
    return abs(upper_y - lower_y) / d_io


def lip_pair_distances(frame: LandmarkFrame, topo: FaceTopology) -> np.ndarray:
    """Euclidean distance of every lip pair, ordered as ``lip_pair_set``."""
    pairs = np.asarray(topo.lip_pair_set, dtype=np.intp)
    a = frame.points[pairs[:, 0]]
    b = frame.points[pairs[:, 1]]
    return np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])


def lip_vertical_distances(frame: LandmarkFrame, topo: FaceTopology) -> float:
    """Mean normalized vertical gap over the stability (upper, lower) pairs."""
    d_io = interocular_distance(frame, topo)
    pairs = np.asarray(topo.stability_pair_set, dtype=np.intp)
    upper_y = frame.points[pairs[:, 0], 1]
    lower_y = frame.points[pairs[:, 1], 1]
    return float(np.mean(np.abs(upper_y - lower_y))) / d_io


def eyebrow_distance(frame: LandmarkFrame, topo: FaceTopology) -> float:
    """Normalized brow-to-eye vertical distance, averaged over both sides.

    Per side: |brow-centroid y - eye-centroid y|; the mean of the two sides
    is divided by the interocular distance.
    """
    d_io = interocular_distance(frame, topo)
    gaps = []
    for brow, eye in ((topo.left_brow_indices, topo.left_eye_indices),
                      (topo.right_brow_indices, topo.right_eye_indices)):
        brow_y = float(_centroid(frame.points, brow)[1])
        eye_y = float(_centroid(frame.points, eye)[1])
        gaps.append(abs(brow_y - eye_y))
    return float(np.mean(gaps)) / d_io


def _per_frame_signal(frames, topo, fn, name: str) -> ScalarSignal:
    values = np.full(len(frames), np.nan)
    for i, frame in enumerate(frames):
        if not frame.detection_ok:
            continue
        try:
            values[i] = fn(frame, topo)
        except DegenerateFaceError:
            continue  # treated like a detection failure downstream
    return ScalarSignal(values=values, name=name)


def openness_signal(frames: Sequence[LandmarkFrame], topo: FaceTopology) -> ScalarSignal:
    return _per_frame_signal(frames, topo, mouth_openness, "mouth_openness")


def lip_gap_signal(frames: Sequence[LandmarkFrame], topo: FaceTopology) -> ScalarSignal:
    return _per_frame_signal(frames, topo, lip_vertical_distances, "lip_vertical_gap")


def brow_signal(frames: Sequence[LandmarkFrame], topo: FaceTopology) -> ScalarSignal:
    return _per_frame_signal(frames, topo, eyebrow_distance, "eyebrow_distance")


def lip_pair_matrix(frames: Sequence[LandmarkFrame], topo: FaceTopology) -> np.ndarray:
    """(N, M) matrix of lip pair distances; NaN rows where detection failed."""
    matrix = np.full((len(frames), topo.n_lip_pairs), np.nan)
    for i, frame in enumerate(frames):
        if frame.detection_ok:
            matrix[i] = lip_pair_distances(frame, topo)
    return matrix
