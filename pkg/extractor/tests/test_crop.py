from __future__ import annotations

import numpy as np
import pytest

from extractor.crop import DegenerateCropError, crop_regions, expand_and_clip


def test_margin_arithmetic_is_exact():
    points = np.array([[100.0, 50.0], [200.0, 150.0]])
    box = expand_and_clip(points, (400, 400), margin=0.2)
    assert box == (80, 30, 220, 170)  # 20% of the 100-px span on each side


def test_crop_clipped_at_frame_edges():
    points = np.array([[5.0, 5.0], [50.0, 60.0]])
    x0, y0, x1, y1 = expand_and_clip(points, (80, 64), margin=0.5)
    assert x0 == 0 and y0 == 0
    assert x1 <= 64 and y1 <= 80


def test_degenerate_box_rejected():
    points = np.array([[10.0, 10.0], [10.0, 10.0]])
    with pytest.raises(DegenerateCropError):
        expand_and_clip(points, (100, 100))


def test_face_and_mouth_crops_inside_frame():
    frame = np.zeros((240, 320, 3), np.uint8)
    points = np.zeros((56, 2))
    points[:, 0] = np.linspace(100, 220, 56)
    points[:, 1] = np.linspace(60, 200, 56)
    face, mouth = crop_regions(frame, points, list(range(40)), margin=0.2)
    assert face.size > 0 and mouth.size > 0
    assert face.shape[0] <= 240 and face.shape[1] <= 320
