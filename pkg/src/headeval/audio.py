"""Frame-aligned audio volume and speech/silence frame sets.

The volume series carries one RMS value per video frame: windows tile the
frame grid exactly (no overlap, no hop parameter), since every consumer
pairs volume with a per-frame landmark signal.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import VadSegment

DEFAULT_MIN_SILENCE_S = 0.3


class AudioError(ValueError):
    pass


@dataclass(frozen=True)
class FrameVolumeSeries:
    """Per-frame RMS energy, one value per video frame."""

    values: np.ndarray
    fps: float

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FrameSets:
    """Frame index sets covered by speech, and by qualifying silences."""

    speech_frames: tuple[int, ...]
    silent_frames: tuple[int, ...]


@dataclass(frozen=True)
class EnergyVadResult:
    segments: tuple[VadSegment, ...]
    low_confidence: bool


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PCM 16-bit mono WAV into float samples in [-1, 1]."""
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1:
            raise AudioError(f"{path}: expected mono audio, got {wav.getnchannels()} channels")
        if wav.getsampwidth() != 2:
            raise AudioError(f"{path}: expected 16-bit PCM, got {8 * wav.getsampwidth()}-bit")
        sample_rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return samples, sample_rate


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write float samples in [-1, 1] as PCM 16-bit mono."""
    scaled = np.round(np.asarray(samples, dtype=np.float64) * 32768.0)
    pcm = np.clip(scaled, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(pcm.tobytes())


def frame_rms(
    samples: np.ndarray, sample_rate: int, fps: float, n_frames: int
) -> FrameVolumeSeries:
    """Per-frame RMS energy over windows tiling the video frame grid.

    Window ``t`` covers the samples in [t/fps, (t+1)/fps); a short final
    window is zero-padded so every value averages over the same duration.
    Deterministic, and positively homogeneous in the sample amplitude.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise AudioError("empty audio")
    if sample_rate <= 0 or fps <= 0 or n_frames < 1:
        raise AudioError("sample_rate, fps, and n_frames must be positive")
    boundaries = np.floor(np.arange(n_frames + 1) * sample_rate / fps + 1e-9).astype(np.int64)
    widths = np.diff(boundaries)
    if np.any(widths <= 0):
        raise AudioError(
            f"fps {fps} leaves empty windows at sample rate {sample_rate}"
        )
    needed = int(boundaries[-1])
    if samples.size < needed:
        padded = np.zeros(needed, dtype=np.float64)
        padded[: samples.size] = samples
    else:
        padded = samples[:needed]
    values = np.empty(n_frames, dtype=np.float64)
    sq = padded * padded
    csum = np.concatenate([[0.0], np.cumsum(sq)])
    for t in range(n_frames):
        lo, hi = boundaries[t], boundaries[t + 1]
        values[t] = np.sqrt((csum[hi] - csum[lo]) / (hi - lo))
    return FrameVolumeSeries(values=values, fps=float(fps))


def _frames_in_segment(seg: VadSegment, fps: float, n_frames: int) -> range:
    # Membership by frame midpoint: frame t is inside iff (t + 0.5)/fps is in
    # [start, end). Unambiguous at shared segment boundaries.
    first = int(np.ceil(seg.start_s * fps - 0.5 - 1e-12))
    last = int(np.ceil(seg.end_s * fps - 0.5 - 1e-12))  # exclusive
    return range(max(first, 0), min(last, n_frames))


def derive_frame_sets(
    vad: Sequence[VadSegment],
    fps: float,
    n_frames: int,
    min_silence_s: float = DEFAULT_MIN_SILENCE_S,
) -> FrameSets:
    """Split frames into speech and qualifying-silence index sets.

    Speech frames come from every speech segment. Silent frames come only
    from non-speech segments strictly longer than ``min_silence_s`` (a
    0.3 s silence does not qualify at the default threshold); shorter gaps
    belong to neither set.
    """
    speech: set[int] = set()
    silent: set[int] = set()
    for seg in vad:
        frames = _frames_in_segment(seg, fps, n_frames)
        if seg.is_speech:
            speech.update(frames)
        elif seg.duration_s > min_silence_s + 1e-9:
            # Strictly longer than the threshold; the small guard keeps
            # nominally-exact durations out despite float subtraction noise.
            silent.update(frames)
    silent -= speech
    return FrameSets(
        speech_frames=tuple(sorted(speech)),
        silent_frames=tuple(sorted(silent)),
    )


def energy_vad_fallback(
    volume: FrameVolumeSeries, threshold_fraction: float = 0.1
) -> EnergyVadResult:
    """Derive speech/silence segments from volume when no VAD file exists.

    Frames quieter than ``threshold_fraction`` of the peak RMS become
    silence; runs of equal labels merge into segments on frame boundaries.
    An all-zero series yields one silence segment flagged low-confidence.
    """
    values = np.asarray(volume.values, dtype=np.float64)
    if values.size == 0:
        raise AudioError("empty volume series")
    peak = float(values.max())
    if peak <= 0.0:
        duration = values.size / volume.fps
        return EnergyVadResult(
            segments=(VadSegment(0.0, duration, is_speech=False),),
            low_confidence=True,
        )
    is_speech = values >= threshold_fraction * peak
    segments = []
    run_start = 0
    for t in range(1, values.size + 1):
        if t == values.size or is_speech[t] != is_speech[run_start]:
            segments.append(VadSegment(
                start_s=run_start / volume.fps,
                end_s=t / volume.fps,
                is_speech=bool(is_speech[run_start]),
            ))
            run_start = t
    return EnergyVadResult(segments=tuple(segments), low_confidence=False)
