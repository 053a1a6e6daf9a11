"""Deterministic synthetic feature corpora for tests and demos.

A fixture is a parametric talking face: lips scale about their centroid
following the audio-volume envelope (optionally lagged or decoupled), brows
rise on a sinusoid, the head follows a static/linear/sinusoidal angle
profile with optional positional jitter, and the WAV is a 1 kHz carrier
with a per-frame piecewise-constant envelope so the frame RMS recovers the
envelope up to a constant factor. Every stochastic element is driven by
the spec's seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .audio import frame_rms
from .features import (
    FeatureBundle,
    IqaFrame,
    LandmarkFrame,
    PoseFrame,
    VadSegment,
    write_feature_bundle,
)
from .topology import FaceTopology, write_topology

CARRIER_HZ = 1000.0
FACE_CENTER = (320.0, 240.0)
EYE_HALF_SPAN = 30.0  # eye centroids sit at center_x -/+ this
BROW_RAISE_BASE = 12.5
UPPER_LIP_Y = 25.0
LOWER_LIP_Y = 35.0


@dataclass(frozen=True)
class FixtureSpec:
    """Parameters of one synthetic video."""

    video_id: str
    n_frames: int = 100
    fps: float = 25.0
    sample_rate: int = 16000
    lip_amplitude: float = 0.3
    lip_frequency_hz: float | None = None  # None: lips follow the volume envelope
    silent_lip_jitter: float = 0.0
    head_profile: str = "sinusoidal"  # static | linear | sinusoidal
    head_amplitude_deg: float = 5.0
    head_frequency_hz: float = 0.5
    translation_jitter_var: float = 0.0
    brow_amplitude: float = 0.1
    brow_frequency_hz: float = 0.4
    speech_schedule: tuple[tuple[float, float, bool], ...] | None = None
    volume_base: float = 0.2
    volume_depth: float = 0.6
    volume_frequency_hz: float = 0.8
    sync_lag_frames: int = 0
    iqa_base: tuple[float, float, float] = (0.8, 0.7, 0.75)
    iqa_jitter: float = 0.03
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_frames < 1 or self.fps <= 0:
            raise ValueError("n_frames and fps must be positive")
        for name in ("lip_amplitude", "silent_lip_jitter", "head_amplitude_deg",
                     "translation_jitter_var", "brow_amplitude", "volume_base",
                     "volume_depth", "iqa_jitter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.lip_amplitude >= 1.0 or self.silent_lip_jitter >= 1.0:
            raise ValueError("lip scale modulation must stay below 1")
        if self.volume_base + self.volume_depth > 1.0:
            raise ValueError("volume envelope must stay within [0, 1]")
        if self.head_profile not in ("static", "linear", "sinusoidal"):
            raise ValueError(f"unknown head profile {self.head_profile!r}")
        duration = self.n_frames / self.fps
        for start, end, _ in self.schedule():
            if not (0.0 <= start < end <= duration + 1e-9):
                raise ValueError(
                    f"schedule segment [{start}, {end}) outside video duration {duration}"
                )

    def schedule(self) -> tuple[tuple[float, float, bool], ...]:
        if self.speech_schedule is not None:
            return tuple(tuple(seg) for seg in self.speech_schedule)
        duration = self.n_frames / self.fps
        return (
            (0.0, 0.4 * duration, True),
            (0.4 * duration, 0.7 * duration, False),
            (0.7 * duration, duration, True),
        )

    @classmethod
    def from_dict(cls, raw: Mapping) -> "FixtureSpec":
        kwargs = dict(raw)
        if "speech_schedule" in kwargs and kwargs["speech_schedule"] is not None:
            kwargs["speech_schedule"] = tuple(
                (float(s), float(e), bool(sp)) for s, e, sp in kwargs["speech_schedule"]
            )
        if "iqa_base" in kwargs:
            kwargs["iqa_base"] = tuple(float(v) for v in kwargs["iqa_base"])
        return cls(**kwargs)


def build_fixture_topology() -> FaceTopology:
    """The synthetic 56-point face layout used by generated fixtures.

    Points 0-19 upper lip, 20-39 lower lip, 40-43/44-47 eye rings,
    48-51/52-55 brows.
    """
    return FaceTopology(
        total_points=56,
        lip_indices=tuple(range(40)),
        upper_lip_indices=tuple(range(20)),
        lower_lip_indices=tuple(range(20, 40)),
        left_eye_indices=(40, 41, 42, 43),
        right_eye_indices=(44, 45, 46, 47),
        left_brow_indices=(48, 49, 50, 51),
        right_brow_indices=(52, 53, 54, 55),
    )


def _base_points() -> np.ndarray:
    """Neutral landmark layout, relative to the face center (y grows down)."""
    pts = np.zeros((56, 2))
    xs = np.linspace(-19.0, 19.0, 20)
    pts[0:20, 0] = xs
    pts[0:20, 1] = UPPER_LIP_Y
    pts[20:40, 0] = xs
    pts[20:40, 1] = LOWER_LIP_Y
    for sign, eye_slice, brow_slice in ((-1, slice(40, 44), slice(48, 52)),
                                        (+1, slice(44, 48), slice(52, 56))):
        cx = sign * EYE_HALF_SPAN
        pts[eye_slice] = [(cx - 3, 0.0), (cx + 3, 0.0), (cx, -2.0), (cx, 2.0)]
        pts[brow_slice] = [(cx - 6, -12.0), (cx - 2, -13.0),
                           (cx + 2, -13.0), (cx + 6, -12.0)]
    return pts


def _envelope01(t_s: np.ndarray, frequency_hz: float) -> np.ndarray:
    return 0.5 * (1.0 + np.sin(2.0 * math.pi * frequency_hz * t_s))


def build_fixture_bundle(
    spec: FixtureSpec, topology: FaceTopology | None = None
) -> tuple[FeatureBundle, np.ndarray]:
    """Synthesize the bundle and raw audio samples for a spec."""
    topo = topology or build_fixture_topology()
    rng = np.random.default_rng(spec.seed)
    n = spec.n_frames
    times = np.arange(n) / spec.fps

    vad = tuple(VadSegment(s, e, sp) for s, e, sp in spec.schedule())
    midpoints = (np.arange(n) + 0.5) / spec.fps
    in_speech = np.zeros(n, dtype=bool)
    for seg in vad:
        if seg.is_speech:
            in_speech |= (midpoints >= seg.start_s) & (midpoints < seg.end_s)

    # Fixed draw order so amplitude sweeps reuse identical noise per seed.
    iqa_noise = rng.uniform(-1.0, 1.0, size=(n, 3))
    silent_noise = rng.uniform(-1.0, 1.0, size=n)
    trans_jitter = rng.normal(
        0.0, math.sqrt(spec.translation_jitter_var), size=(n, 2)
    ) if spec.translation_jitter_var > 0 else np.zeros((n, 2))

    volume_env = np.where(
        in_speech,
        spec.volume_base + spec.volume_depth * _envelope01(times, spec.volume_frequency_hz),
        0.0,
    )

    lag_s = spec.sync_lag_frames / spec.fps
    if spec.lip_frequency_hz is not None:
        lip_env = _envelope01(times - lag_s, spec.lip_frequency_hz)
    else:
        lip_env = _envelope01(times - lag_s, spec.volume_frequency_hz)
    lip_scale = np.where(
        in_speech,
        1.0 + spec.lip_amplitude * lip_env,
        1.0 + spec.silent_lip_jitter * silent_noise,
    )

    brow_raise = spec.brow_amplitude * 2.0 * EYE_HALF_SPAN * _envelope01(
        times, spec.brow_frequency_hz
    )

    base = _base_points()
    lip_centroid = base[0:40].mean(axis=0)
    cx, cy = FACE_CENTER
    landmark_frames = []
    for t in range(n):
        pts = base.copy()
        pts[0:40] = lip_centroid + lip_scale[t] * (pts[0:40] - lip_centroid)
        pts[48:56, 1] -= brow_raise[t]
        pts[:, 0] += cx
        pts[:, 1] += cy
        landmark_frames.append(LandmarkFrame(
            frame_index=t,
            timestamp_s=float(times[t]),
            points=pts,
            detection_ok=True,
        ))

    if spec.head_profile == "static":
        angles = np.zeros((n, 3))
    elif spec.head_profile == "linear":
        ramp = spec.head_amplitude_deg * (np.arange(n) / max(n - 1, 1))
        angles = np.stack([ramp, ramp * 0.5, ramp * 0.25], axis=1)
    else:
        phase = 2.0 * math.pi * spec.head_frequency_hz * times
        angles = spec.head_amplitude_deg * np.stack(
            [np.sin(phase), np.sin(phase + 2 * math.pi / 3),
             np.sin(phase + 4 * math.pi / 3)], axis=1
        )
    pose_frames = tuple(
        PoseFrame(
            frame_index=t,
            pitch_deg=float(angles[t, 0]),
            yaw_deg=float(angles[t, 1]),
            roll_deg=float(angles[t, 2]),
            center_x=float(cx + trans_jitter[t, 0]),
            center_y=float(cy + trans_jitter[t, 1]),
        )
        for t in range(n)
    )

    iqa_frames = tuple(
        IqaFrame(
            frame_index=t,
            aesthetic=float(np.clip(spec.iqa_base[0] + spec.iqa_jitter * iqa_noise[t, 0], 0, 1)),
            face_quality=float(np.clip(spec.iqa_base[1] + spec.iqa_jitter * iqa_noise[t, 1], 0, 1)),
            mouth_quality=float(np.clip(spec.iqa_base[2] + spec.iqa_jitter * iqa_noise[t, 2], 0, 1)),
        )
        for t in range(n)
    )

    samples = _synthesize_audio(volume_env, spec)
    volume = frame_rms(samples, spec.sample_rate, spec.fps, n).values

    bundle = FeatureBundle(
        video_id=spec.video_id,
        fps=spec.fps,
        landmarks=tuple(landmark_frames),
        pose=pose_frames,
        iqa=iqa_frames,
        vad=vad,
        audio_volume=volume,
    )
    return bundle, samples


def _synthesize_audio(volume_env: np.ndarray, spec: FixtureSpec) -> np.ndarray:
    """1 kHz carrier with per-frame constant amplitude from the envelope."""
    n = len(volume_env)
    boundaries = np.floor(
        np.arange(n + 1) * spec.sample_rate / spec.fps + 1e-9
    ).astype(np.int64)
    total = int(boundaries[-1])
    amplitude = np.zeros(total)
    for t in range(n):
        amplitude[boundaries[t]:boundaries[t + 1]] = volume_env[t]
    # Per-window RMS is envelope/sqrt(2): a pure rescaling, invisible to the
    # min-max normalization every consumer applies.
    k = np.arange(total) / spec.sample_rate
    return amplitude * np.sin(2.0 * math.pi * CARRIER_HZ * k)


def generate_fixture(
    spec: FixtureSpec,
    out_dir: str | Path,
    topology: FaceTopology | None = None,
    overwrite: bool = False,
) -> Path:
    """Write one fixture's canonical feature directory; returns its path."""
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()) and not overwrite:
        raise FileExistsError(f"{out_dir} exists and is not empty (use overwrite)")
    bundle, samples = build_fixture_bundle(spec, topology)
    write_feature_bundle(
        out_dir,
        bundle,
        audio=(samples, spec.sample_rate),
        meta_extra={"sample_rate": spec.sample_rate, "fixture": _spec_dict(spec)},
    )
    return out_dir


def _spec_dict(spec: FixtureSpec) -> dict:
    raw = asdict(spec)
    raw["iqa_base"] = list(spec.iqa_base)
    if spec.speech_schedule is not None:
        raw["speech_schedule"] = [list(seg) for seg in spec.speech_schedule]
    return raw


@dataclass(frozen=True)
class CorpusSpec:
    """Fixture specs for a whole corpus: ground truth plus model variants."""

    models: Mapping[str, tuple[FixtureSpec, ...]]

    def __post_init__(self) -> None:
        if "ground_truth" not in self.models:
            raise ValueError("corpus spec must include a 'ground_truth' entry")
        gt_ids = {s.video_id for s in self.models["ground_truth"]}
        for name, specs in self.models.items():
            ids = {s.video_id for s in specs}
            if ids != gt_ids:
                raise ValueError(
                    f"model {name!r} video ids {sorted(ids)} do not match "
                    f"ground truth {sorted(gt_ids)}"
                )

    @classmethod
    def from_dict(cls, raw: Mapping) -> "CorpusSpec":
        models = {
            name: tuple(FixtureSpec.from_dict(s) for s in specs)
            for name, specs in raw["models"].items()
        }
        return cls(models=models)


def generate_corpus(
    corpus: CorpusSpec, out_dir: str | Path, overwrite: bool = False
) -> Path:
    """Write a full evaluation corpus: topology, feature dirs, manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    topo = build_fixture_topology()
    write_topology(out_dir / "topology.json", topo)
    for model, specs in corpus.models.items():
        for spec in specs:
            generate_fixture(spec, out_dir / model / spec.video_id, topo, overwrite)
    video_ids = sorted(s.video_id for s in corpus.models["ground_truth"])
    manifest = {
        "topology": "topology.json",
        "ground_truth": "ground_truth",
        "models": {name: name for name in sorted(corpus.models) if name != "ground_truth"},
        "video_ids": video_ids,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out_dir


def demo_corpus_spec(n_videos: int = 3, n_frames: int = 100, base_seed: int = 100) -> CorpusSpec:
    """A small built-in corpus: ground truth plus two contrasting models.

    ``damped`` halves every dynamic amplitude; ``jittery`` exaggerates
    motion, adds silent-period lip noise, and lags the audio by 4 frames.
    """
    def spec(vid: int, seed: int, **kwargs) -> FixtureSpec:
        return FixtureSpec(
            video_id=f"vid_{vid:03d}", n_frames=n_frames, seed=seed, **kwargs
        )

    gt, damped, jittery = [], [], []
    for v in range(n_videos):
        seed = base_seed + v
        gt.append(spec(v, seed, lip_amplitude=0.3, head_amplitude_deg=5.0,
                       brow_amplitude=0.10, translation_jitter_var=1.0,
                       silent_lip_jitter=0.02))
        damped.append(spec(v, seed, lip_amplitude=0.15, head_amplitude_deg=2.5,
                           brow_amplitude=0.05, translation_jitter_var=0.5,
                           silent_lip_jitter=0.01, iqa_base=(0.7, 0.6, 0.65)))
        jittery.append(spec(v, seed, lip_amplitude=0.45, head_amplitude_deg=9.0,
                            brow_amplitude=0.18, translation_jitter_var=3.0,
                            silent_lip_jitter=0.08, sync_lag_frames=4,
                            iqa_base=(0.6, 0.55, 0.5)))
    return CorpusSpec(models={
        "ground_truth": tuple(gt),
        "damped": tuple(damped),
        "jittery": tuple(jittery),
    })


def load_corpus_spec(path: str | Path) -> CorpusSpec:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return CorpusSpec.from_dict(raw)
