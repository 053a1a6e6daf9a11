from __future__ import annotations

import numpy as np
import pytest

from headeval.features import FeatureBundle, IqaFrame, LandmarkFrame, PoseFrame, VadSegment
from headeval.fixtures import build_fixture_topology
from headeval.topology import FaceTopology


@pytest.fixture(scope="session")
def topo() -> FaceTopology:
    return build_fixture_topology()


def random_bundle(
    rng: np.random.Generator,
    n_frames: int | None = None,
    with_iqa: bool = True,
    with_volume: bool = True,
    detection_failure_rate: float = 0.1,
) -> FeatureBundle:
    """A structurally valid bundle with rich random content.

    Landmarks wander around a plausible face layout (eyes never coincide),
    IQA scores may be missing per frame, and the VAD alternates speech and
    silence with durations straddling the 300 ms threshold.
    """
    from headeval.fixtures import _base_points

    n = n_frames or int(rng.integers(20, 50))
    fps = 25.0
    base = _base_points() + np.array([320.0, 240.0])

    landmark_frames = []
    for t in range(n):
        ok = t < 2 or rng.random() >= detection_failure_rate
        pts = base + rng.normal(0.0, 2.5, size=base.shape)
        landmark_frames.append(LandmarkFrame(
            frame_index=t,
            timestamp_s=t / fps,
            points=pts,
            detection_ok=bool(ok),
        ))

    pose_frames = tuple(
        PoseFrame(
            frame_index=t,
            pitch_deg=float(rng.uniform(-30, 30)),
            yaw_deg=float(rng.uniform(-30, 30)),
            roll_deg=float(rng.uniform(-30, 30)),
            center_x=float(rng.uniform(200, 400)),
            center_y=float(rng.uniform(150, 350)),
        )
        for t in range(n)
    )

    iqa = None
    if with_iqa:
        def maybe() -> float | None:
            return float(rng.uniform(0, 1)) if rng.random() < 0.9 else None

        iqa = tuple(
            IqaFrame(frame_index=t, aesthetic=maybe(), face_quality=maybe(),
                     mouth_quality=maybe())
            for t in range(n)
        )

    duration = n / fps
    segments = []
    cursor = 0.0
    is_speech = bool(rng.random() < 0.5)
    while cursor < duration - 1e-9:
        seg_len = float(rng.uniform(0.15, 1.0))
        end = min(cursor + seg_len, duration)
        segments.append(VadSegment(cursor, end, is_speech))
        cursor = end
        is_speech = not is_speech

    volume = rng.uniform(0.0, 0.5, size=n) if with_volume else None

    return FeatureBundle(
        video_id="synthetic",
        fps=fps,
        landmarks=tuple(landmark_frames),
        pose=pose_frames,
        iqa=iqa,
        vad=tuple(segments),
        audio_volume=volume,
    )
