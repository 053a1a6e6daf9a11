"""The adapter's landmark template: a 56-point face layout.

Point order: 0-19 upper lip, 20-39 lower lip, 40-43 left eye, 44-47 right
eye, 48-51 left brow, 52-55 right brow. The matching index sets ship as
``topology.json`` next to every extracted corpus so the evaluation engine
never hardcodes them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

TOTAL_POINTS = 56

TOPOLOGY = {
    "total_points": TOTAL_POINTS,
    "lip_indices": list(range(40)),
    "upper_lip_indices": list(range(20)),
    "lower_lip_indices": list(range(20, 40)),
    "left_eye_indices": [40, 41, 42, 43],
    "right_eye_indices": [44, 45, 46, 47],
    "left_brow_indices": [48, 49, 50, 51],
    "right_brow_indices": [52, 53, 54, 55],
}


def write_topology(path: str | Path) -> None:
    Path(path).write_text(json.dumps(TOPOLOGY, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def template_points(box: tuple[int, int, int, int], mouth_open_frac: float) -> np.ndarray:
    """Place the 56-point template into a face bounding box.

    Coordinates are fractions of the box mapped to pixels; the lower lip
    drops by ``mouth_open_frac`` of the box height.
    """
    x, y, w, h = box
    pts = np.zeros((TOTAL_POINTS, 2))
    xs = np.linspace(0.30, 0.70, 20)
    pts[0:20, 0] = xs
    pts[0:20, 1] = 0.72
    pts[20:40, 0] = xs
    pts[20:40, 1] = 0.78 + mouth_open_frac
    for side, eye_slice, brow_slice in ((0.32, slice(40, 44), slice(48, 52)),
                                        (0.68, slice(44, 48), slice(52, 56))):
        pts[eye_slice] = [(side - 0.04, 0.40), (side + 0.04, 0.40),
                          (side, 0.38), (side, 0.42)]
        pts[brow_slice] = [(side - 0.06, 0.30), (side - 0.02, 0.29),
                           (side + 0.02, 0.29), (side + 0.06, 0.30)]
    pts[:, 0] = x + pts[:, 0] * w
    pts[:, 1] = y + pts[:, 1] * h
    return pts
