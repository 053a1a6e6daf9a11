"""Pluggable model backends.

The ``classical`` backends are deterministic CPU heuristics that exercise
the full pipeline without pretrained weights; they assume a single bright
subject on a darker background and are meant for testing and smoke runs,
not for benchmarking real generators. The named pretrained backends
(``mediapipe``, ``topiq``, ``musiq``, ``silero``) are thin wrappers over
their public APIs and raise ``BackendUnavailable`` when the package or its
weights are missing.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np


class BackendUnavailable(RuntimeError):
    """The requested backend's package or weights cannot be loaded."""


@dataclass
class FaceObservation:
    detected: bool
    points: np.ndarray | None  # (56, 2) template landmarks
    box: tuple[int, int, int, int] | None


# -- face + landmarks ---------------------------------------------------------

class ClassicalLandmarkBackend:
    """Luminance-based face box plus a template mesh with mouth tracking.

    The face is the largest connected region brighter than ``face_thresh``;
    mouth opening is read from dark rows inside the lower half of the box.
    """

    name = "classical"

    def __init__(self, face_thresh: int = 90, mouth_thresh: int = 70,
                 min_box_frac: float = 0.02):
        self.face_thresh = face_thresh
        self.mouth_thresh = mouth_thresh
        self.min_box_frac = min_box_frac

    def detect(self, frame_bgr: np.ndarray) -> FaceObservation:
        from .topology import template_points

        gray = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2GRAY)
        mask = (gray >= self.face_thresh).astype(np.uint8)
        contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_SIMPLE)
        if not contours:
            return FaceObservation(False, None, None)
        best = max(contours, key=cv2.contourArea)
        x, y, w, h = cv2.boundingRect(best)
        if w * h < self.min_box_frac * gray.size:
            return FaceObservation(False, None, None)

        # Mouth window: central third of the box between 60% and 85% of its
        # height, which stays inside the face, so dark rows mean open mouth.
        roi = gray[y + int(0.60 * h) : y + int(0.85 * h),
                   x + int(0.35 * w) : x + int(0.65 * w)]
        open_frac = 0.0
        if roi.size:
            dark_rows = ((roi < self.mouth_thresh).sum(axis=1) > 2).sum()
            open_frac = min(float(dark_rows) / h, 0.18)
        return FaceObservation(True, template_points((x, y, w, h), open_frac), (x, y, w, h))


class MediaPipeLandmarkBackend:
    """Dense face mesh via the mediapipe package (468 points)."""

    name = "mediapipe"

    def __init__(self):
        try:
            import mediapipe as mp
        except ImportError as exc:
            raise BackendUnavailable(
                "mediapipe is not installed (pip install mediapipe)") from exc
        self._mesh = mp.solutions.face_mesh.FaceMesh(
            static_image_mode=False, max_num_faces=1, refine_landmarks=False)

    def detect(self, frame_bgr: np.ndarray) -> FaceObservation:
        rgb = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB)
        result = self._mesh.process(rgb)
        if not result.multi_face_landmarks:
            return FaceObservation(False, None, None)
        h, w = frame_bgr.shape[:2]
        pts = np.array([(lm.x * w, lm.y * h)
                        for lm in result.multi_face_landmarks[0].landmark])
        xs, ys = pts[:, 0], pts[:, 1]
        box = (int(xs.min()), int(ys.min()),
               int(xs.max() - xs.min()), int(ys.max() - ys.min()))
        return FaceObservation(True, pts, box)


# -- head pose ----------------------------------------------------------------

class ClassicalPoseBackend:
    """Face-center translation only; orientation angles stay at zero.

    A transformer pose estimator can slot in here once its checkpoint is
    available; the feature schema does not change.
    """

    name = "classical"

    def estimate(self, observation: FaceObservation) -> tuple[float, float, float, float, float]:
        if not observation.detected or observation.box is None:
            return 0.0, 0.0, 0.0, 0.0, 0.0
        x, y, w, h = observation.box
        return 0.0, 0.0, 0.0, x + w / 2.0, y + h / 2.0


# -- image quality ------------------------------------------------------------

def _squash(value: float, scale: float) -> float:
    # Maps [0, inf) into [0, 1); monotone, so relative order survives.
    return float(value / (value + scale))


class ClassicalIqaBackend:
    """Colorfulness for the aesthetic score, sharpness for the crops."""

    name = "classical"

    def aesthetic(self, frame_bgr: np.ndarray) -> float:
        b, g, r = cv2.split(frame_bgr.astype(np.float64))
        rg = r - g
        yb = 0.5 * (r + g) - b
        colorfulness = float(np.hypot(rg.std(), yb.std())
                             + 0.3 * np.hypot(abs(rg.mean()), abs(yb.mean())))
        return _squash(colorfulness, 60.0)

    def crop_quality(self, crop_bgr: np.ndarray) -> float:
        gray = cv2.cvtColor(crop_bgr, cv2.COLOR_BGR2GRAY)
        sharpness = float(cv2.Laplacian(gray, cv2.CV_64F).var())
        return _squash(sharpness, 400.0)


class PyiqaBackend:
    """Pretrained no-reference IQA scorers via the pyiqa package."""

    name = "pyiqa"

    def __init__(self, aesthetic_metric: str = "topiq_iaa",
                 face_metric: str = "topiq_nr-face", mouth_metric: str = "musiq-spaq",
                 device: str = "cpu"):
        try:
            import pyiqa
            import torch
        except ImportError as exc:
            raise BackendUnavailable(
                "pyiqa/torch are not installed (pip install pyiqa)") from exc
        dev = torch.device(device)
        self._aesthetic = pyiqa.create_metric(aesthetic_metric, device=dev)
        self._face = pyiqa.create_metric(face_metric, device=dev)
        self._mouth = pyiqa.create_metric(mouth_metric, device=dev)

    @staticmethod
    def _to_unit(value: float, score_range: tuple[float, float]) -> float:
        lo, hi = score_range
        return float(min(max((value - lo) / (hi - lo), 0.0), 1.0))

    def aesthetic(self, frame_bgr: np.ndarray) -> float:
        return self._run(self._aesthetic, frame_bgr)

    def crop_quality(self, crop_bgr: np.ndarray) -> float:
        return self._run(self._face, crop_bgr)

    def _run(self, metric, image_bgr: np.ndarray) -> float:
        import torch

        rgb = cv2.cvtColor(image_bgr, cv2.COLOR_BGR2RGB)
        tensor = torch.from_numpy(rgb).permute(2, 0, 1)[None].float() / 255.0
        value = float(metric(tensor).item())
        lo, hi = getattr(metric, "score_range", (0.0, 1.0)) or (0.0, 1.0)
        return self._to_unit(value, (lo, hi))


# -- voice activity -----------------------------------------------------------

class EnergyVadBackend:
    """RMS-threshold segmentation over fixed 30 ms windows."""

    name = "energy"

    def __init__(self, threshold_fraction: float = 0.1, window_s: float = 0.03):
        self.threshold_fraction = threshold_fraction
        self.window_s = window_s

    def segment(self, samples: np.ndarray, sample_rate: int) -> list[dict]:
        window = max(int(self.window_s * sample_rate), 1)
        n_windows = int(np.ceil(len(samples) / window))
        padded = np.zeros(n_windows * window)
        padded[: len(samples)] = samples
        rms = np.sqrt((padded.reshape(n_windows, window) ** 2).mean(axis=1))
        peak = rms.max()
        if peak <= 0:
            return [{"start_s": 0.0, "end_s": len(samples) / sample_rate,
                     "is_speech": False}]
        loud = rms >= self.threshold_fraction * peak
        segments = []
        run_start = 0
        for i in range(1, n_windows + 1):
            if i == n_windows or loud[i] != loud[run_start]:
                segments.append({
                    "start_s": run_start * window / sample_rate,
                    "end_s": min(i * window, len(samples)) / sample_rate,
                    "is_speech": bool(loud[run_start]),
                })
                run_start = i
        return segments


class SileroVadBackend:
    """Neural VAD via torch.hub's silero-vad distribution."""

    name = "silero"

    def __init__(self):
        try:
            import torch
        except ImportError as exc:
            raise BackendUnavailable("torch is not installed") from exc
        try:
            self._model, utils = torch.hub.load(
                "snakers4/silero-vad", "silero_vad", trust_repo=True)
        except Exception as exc:
            raise BackendUnavailable(
                f"silero-vad weights could not be loaded: {exc}") from exc
        self._get_timestamps = utils[0]

    def segment(self, samples: np.ndarray, sample_rate: int) -> list[dict]:
        import torch

        tensor = torch.from_numpy(samples.astype(np.float32))
        stamps = self._get_timestamps(tensor, self._model, sampling_rate=sample_rate)
        segments = []
        cursor = 0.0
        for stamp in stamps:
            start = stamp["start"] / sample_rate
            end = stamp["end"] / sample_rate
            if start > cursor:
                segments.append({"start_s": cursor, "end_s": start, "is_speech": False})
            segments.append({"start_s": start, "end_s": end, "is_speech": True})
            cursor = end
        total = len(samples) / sample_rate
        if cursor < total:
            segments.append({"start_s": cursor, "end_s": total, "is_speech": False})
        return segments


LANDMARK_BACKENDS = {
    "classical": ClassicalLandmarkBackend,
    "mediapipe": MediaPipeLandmarkBackend,
}
POSE_BACKENDS = {"classical": ClassicalPoseBackend}
IQA_BACKENDS = {"classical": ClassicalIqaBackend, "pyiqa": PyiqaBackend}
VAD_BACKENDS = {"energy": EnergyVadBackend, "silero": SileroVadBackend}


def build(registry: dict, name: str):
    if name not in registry:
        raise BackendUnavailable(
            f"unknown backend {name!r}; choose from {sorted(registry)}")
    return registry[name]()
