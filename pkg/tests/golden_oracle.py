"""Independent straight-line reference implementations of the metrics.

Deliberately written as plain Python loops over the ``statistics`` module,
sharing no helper code with the engine, so agreement between the two is
meaningful. Semantics mirror the engine's documented conventions: sample
(N-1) standard deviations and variances, frames with failed detection
dropped, frame-midpoint segment membership, silences strictly longer than
the threshold, epsilon-guarded min-max normalization.
"""

from __future__ import annotations

import math
import statistics

LIP_SYNC_EPSILON = 1e-8


def centroid(points, indices):
    xs = [float(points[i][0]) for i in indices]
    ys = [float(points[i][1]) for i in indices]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def interocular(points, topo) -> float:
    lx, ly = centroid(points, topo.left_eye_indices)
    rx, ry = centroid(points, topo.right_eye_indices)
    return math.hypot(lx - rx, ly - ry)


def usable(frame, topo) -> bool:
    return frame.detection_ok and interocular(frame.points, topo) > 0.0


def sample_std(values) -> float:
    return statistics.stdev(values)


def sample_var(values) -> float:
    if len(values) < 2:
        return 0.0
    return statistics.variance(values)


def mean_score(iqa, attr):
    if iqa is None:
        return None
    scores = [getattr(f, attr) for f in iqa if getattr(f, attr) is not None]
    if not scores:
        return None
    return sum(scores) / len(scores)


def lip_dynamics(landmarks, topo):
    rows = []
    for frame in landmarks:
        if not frame.detection_ok:
            continue
        rows.append([
            math.hypot(
                float(frame.points[a][0]) - float(frame.points[b][0]),
                float(frame.points[a][1]) - float(frame.points[b][1]),
            )
            for a, b in topo.lip_pair_set
        ])
    if len(rows) < 2:
        return None
    stds = [sample_std([row[m] for row in rows]) for m in range(len(topo.lip_pair_set))]
    return sum(stds) / len(stds)


def head_motion_dynamics(pose):
    if len(pose) < 2:
        return None
    pitch = [p.pitch_deg for p in pose]
    yaw = [p.yaw_deg for p in pose]
    roll = [p.roll_deg for p in pose]
    cx = [p.center_x for p in pose]
    cy = [p.center_y for p in pose]
    mean_angle_std = (sample_std(pitch) + sample_std(yaw) + sample_std(roll)) / 3.0
    diffs = []
    for seq in (pitch, yaw, roll):
        diffs.append([seq[j] - seq[j - 1] for j in range(1, len(seq))])
    mean_delta_var = sum(sample_var(d) for d in diffs) / 3.0
    mean_trans_var = (sample_var(cx) + sample_var(cy)) / 2.0
    return math.sqrt(mean_angle_std * mean_delta_var + mean_trans_var)


def brow_distance(frame, topo) -> float:
    d_io = interocular(frame.points, topo)
    total = 0.0
    for brow, eye in ((topo.left_brow_indices, topo.left_eye_indices),
                      (topo.right_brow_indices, topo.right_eye_indices)):
        _, brow_y = centroid(frame.points, brow)
        _, eye_y = centroid(frame.points, eye)
        total += abs(brow_y - eye_y)
    return (total / 2.0) / d_io


def eyebrow_dynamics(landmarks, topo):
    values = [brow_distance(f, topo) for f in landmarks if usable(f, topo)]
    if len(values) < 2:
        return None
    return sample_std(values)


def frame_sets(vad, fps, n_frames, min_silence_s=0.3):
    speech, silent = set(), set()
    for seg in vad:
        for t in range(n_frames):
            mid = (t + 0.5) / fps
            if seg.start_s <= mid < seg.end_s:
                if seg.is_speech:
                    speech.add(t)
                elif (seg.end_s - seg.start_s) > min_silence_s + 1e-9:
                    silent.add(t)
    silent -= speech
    return sorted(speech), sorted(silent)


def lip_gap(frame, topo) -> float:
    d_io = interocular(frame.points, topo)
    gaps = [
        abs(float(frame.points[u][1]) - float(frame.points[v][1]))
        for u, v in topo.stability_pair_set
    ]
    return (sum(gaps) / len(gaps)) / d_io


def silent_lip_stability(landmarks, topo, silent_frames):
    values = [
        lip_gap(landmarks[t], topo)
        for t in silent_frames
        if usable(landmarks[t], topo)
    ]
    if not values:
        return None
    med = statistics.median(values)
    return statistics.median([abs(v - med) for v in values])


def openness(frame, topo) -> float:
    d_io = interocular(frame.points, topo)
    _, upper_y = centroid(frame.points, topo.upper_lip_indices)
    _, lower_y = centroid(frame.points, topo.lower_lip_indices)
    return abs(upper_y - lower_y) / d_io


def lip_sync(landmarks, topo, volume, speech_frames, epsilon=LIP_SYNC_EPSILON):
    pairs = [
        (openness(landmarks[t], topo), float(volume[t]))
        for t in speech_frames
        if usable(landmarks[t], topo)
    ]
    if not pairs:
        return None
    o_vals = [o for o, _ in pairs]
    v_vals = [v for _, v in pairs]
    o_min, o_max = min(o_vals), max(o_vals)
    v_min, v_max = min(v_vals), max(v_vals)
    total = 0.0
    for o, v in pairs:
        o_n = (o - o_min) / (o_max - o_min + epsilon)
        v_n = (v - v_min) / (v_max - v_min + epsilon)
        total += abs(o_n - v_n)
    return total / len(pairs)


def lmd(landmarks_a, landmarks_b, topo, region="face"):
    indices = range(topo.total_points) if region == "face" else topo.lip_indices
    frame_means = []
    for fa, fb in zip(landmarks_a, landmarks_b):
        if not (fa.detection_ok and fb.detection_ok):
            continue
        dists = [
            math.hypot(
                float(fa.points[i][0]) - float(fb.points[i][0]),
                float(fa.points[i][1]) - float(fb.points[i][1]),
            )
            for i in indices
        ]
        frame_means.append(sum(dists) / len(dists))
    return sum(frame_means) / len(frame_means)


def metric_vector(bundle, topo, min_silence_s=0.3):
    """All eight metrics for a bundle, as a plain dict."""
    speech, silent = frame_sets(bundle.vad, bundle.fps, bundle.n_frames, min_silence_s)
    sync = None
    if bundle.audio_volume is not None:
        sync = lip_sync(bundle.landmarks, topo, bundle.audio_volume, speech)
    return {
        "global_aesthetics": mean_score(bundle.iqa, "aesthetic"),
        "mouth_quality": mean_score(bundle.iqa, "mouth_quality"),
        "face_quality": mean_score(bundle.iqa, "face_quality"),
        "lip_dynamics": lip_dynamics(bundle.landmarks, topo),
        "head_motion_dynamics": head_motion_dynamics(bundle.pose),
        "eyebrow_dynamics": eyebrow_dynamics(bundle.landmarks, topo),
        "silent_lip_stability": silent_lip_stability(bundle.landmarks, topo, silent),
        "lip_sync": sync,
    }
