from __future__ import annotations

import math
import wave
from pathlib import Path

import cv2
import numpy as np
import pytest


def render_clip(path: Path, n_frames: int = 50, fps: float = 25.0,
                with_face: bool = True) -> Path:
    """A 2-second synthetic talking face: bright oval on a dark background,
    dark mouth opening and closing, slight horizontal drift."""
    size = (320, 240)
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), fps, size)
    assert writer.isOpened()
    for t in range(n_frames):
        frame = np.full((size[1], size[0], 3), 25, np.uint8)
        if with_face:
            cx = 160 + int(10 * math.sin(2 * math.pi * t / n_frames))
            cy = 120
            cv2.ellipse(frame, (cx, cy), (60, 80), 0, 0, 360, (150, 170, 205), -1)
            for ex in (cx - 25, cx + 25):
                cv2.circle(frame, (ex, cy - 25), 7, (60, 60, 60), -1)
            mouth_half = 3 + int(8 * abs(math.sin(2 * math.pi * 2 * t / n_frames)))
            cv2.ellipse(frame, (cx, cy + 40), (22, mouth_half), 0, 0, 360,
                        (30, 25, 40), -1)
        writer.write(frame)
    writer.release()
    return path


def write_tone_wav(path: Path, duration_s: float = 2.0, sample_rate: int = 16000) -> Path:
    """Half tone, half silence, so an energy VAD finds both kinds of segment."""
    n = int(duration_s * sample_rate)
    t = np.arange(n) / sample_rate
    samples = 0.4 * np.sin(2 * math.pi * 440.0 * t)
    samples[n // 2 :] = 0.0
    pcm = np.round(samples * 32768.0).clip(-32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(pcm.tobytes())
    return path


@pytest.fixture(scope="session")
def face_clip(tmp_path_factory) -> Path:
    return render_clip(tmp_path_factory.mktemp("clips") / "talker.avi")
