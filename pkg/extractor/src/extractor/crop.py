"""Landmark-driven region crops for the IQA scorers."""

from __future__ import annotations

import numpy as np

DEFAULT_MARGIN = 0.2


class DegenerateCropError(ValueError):
    """The landmark box has no area; the frame cannot be scored."""


def expand_and_clip(
    points: np.ndarray,
    frame_shape: tuple[int, int],
    margin: float = DEFAULT_MARGIN,
) -> tuple[int, int, int, int]:
    """Bounding box of the points, expanded by ``margin`` per side and
    clipped to the frame; returns (x0, y0, x1, y1) with x1/y1 exclusive."""
    height, width = frame_shape[:2]
    x_min, y_min = points.min(axis=0)
    x_max, y_max = points.max(axis=0)
    w, h = x_max - x_min, y_max - y_min
    if w <= 0 or h <= 0:
        raise DegenerateCropError("zero-area landmark box")
    x0 = max(int(np.floor(x_min - margin * w)), 0)
    y0 = max(int(np.floor(y_min - margin * h)), 0)
    x1 = min(int(np.ceil(x_max + margin * w)), width)
    y1 = min(int(np.ceil(y_max + margin * h)), height)
    if x1 <= x0 or y1 <= y0:
        raise DegenerateCropError("crop degenerated after clipping")
    return x0, y0, x1, y1


def crop_regions(
    frame_bgr: np.ndarray,
    points: np.ndarray,
    lip_indices: list[int],
    margin: float = DEFAULT_MARGIN,
) -> tuple[np.ndarray, np.ndarray]:
    """Face crop from all landmarks, mouth crop from the lip landmarks."""
    fx0, fy0, fx1, fy1 = expand_and_clip(points, frame_bgr.shape, margin)
    mx0, my0, mx1, my1 = expand_and_clip(points[lip_indices], frame_bgr.shape, margin)
    return frame_bgr[fy0:fy1, fx0:fx1], frame_bgr[my0:my1, mx0:mx1]
