"""Face topology: named landmark index sets over a fixed mesh layout.

The engine never hardcodes landmark indices; every index set (lips, eyes,
brows, distance pairs) comes from a corpus-level ``topology.json`` so the
choice of mesh is auditable and swappable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

LIP_LANDMARK_COUNT = 40


class TopologyError(ValueError):
    """Raised when a topology file violates its structural invariants."""


@dataclass(frozen=True)
class FaceTopology:
    """Index sets naming the facial regions used by the metric engine.

    ``lip_pair_set`` holds the landmark pairs whose distances describe lip
    shape; ``stability_pair_set`` holds (upper, lower) lip pairs whose
    vertical gaps measure mouth opening. Both default to canonical
    constructions when a topology file omits them (see ``load_topology``).
    """

    total_points: int
    lip_indices: tuple[int, ...]
    upper_lip_indices: tuple[int, ...]
    lower_lip_indices: tuple[int, ...]
    left_eye_indices: tuple[int, ...]
    right_eye_indices: tuple[int, ...]
    left_brow_indices: tuple[int, ...]
    right_brow_indices: tuple[int, ...]
    lip_pair_set: tuple[tuple[int, int], ...] = field(default=())
    stability_pair_set: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.total_points <= 0:
            raise TopologyError("total_points must be positive")
        if len(self.lip_indices) != LIP_LANDMARK_COUNT:
            raise TopologyError(
                f"lip_indices must have exactly {LIP_LANDMARK_COUNT} entries, "
                f"got {len(self.lip_indices)}"
            )
        named = {
            "lip_indices": self.lip_indices,
            "upper_lip_indices": self.upper_lip_indices,
            "lower_lip_indices": self.lower_lip_indices,
            "left_eye_indices": self.left_eye_indices,
            "right_eye_indices": self.right_eye_indices,
            "left_brow_indices": self.left_brow_indices,
            "right_brow_indices": self.right_brow_indices,
        }
        for name, indices in named.items():
            if not indices:
                raise TopologyError(f"{name} must be non-empty")
            for idx in indices:
                if not 0 <= idx < self.total_points:
                    raise TopologyError(
                        f"{name} contains index {idx} outside [0, {self.total_points})"
                    )
        if not self.lip_pair_set:
            object.__setattr__(
                self, "lip_pair_set", default_lip_pairs(self.lip_indices)
            )
        if not self.stability_pair_set:
            object.__setattr__(
                self,
                "stability_pair_set",
                default_stability_pairs(self.upper_lip_indices, self.lower_lip_indices),
            )
        lip_set = set(self.lip_indices)
        for a, b in self.lip_pair_set:
            if a not in lip_set or b not in lip_set:
                raise TopologyError(f"lip_pair_set pair ({a}, {b}) not drawn from lip_indices")
        for a, b in self.stability_pair_set:
            for idx in (a, b):
                if not 0 <= idx < self.total_points:
                    raise TopologyError(f"stability_pair_set index {idx} out of range")

    @property
    def n_lip_pairs(self) -> int:
        return len(self.lip_pair_set)

    @property
    def n_stability_pairs(self) -> int:
        return len(self.stability_pair_set)

    def to_dict(self) -> dict:
        return {
            "total_points": self.total_points,
            "lip_indices": list(self.lip_indices),
            "upper_lip_indices": list(self.upper_lip_indices),
            "lower_lip_indices": list(self.lower_lip_indices),
            "left_eye_indices": list(self.left_eye_indices),
            "right_eye_indices": list(self.right_eye_indices),
            "left_brow_indices": list(self.left_brow_indices),
            "right_brow_indices": list(self.right_brow_indices),
            "lip_pair_set": [list(p) for p in self.lip_pair_set],
            "stability_pair_set": [list(p) for p in self.stability_pair_set],
        }


def default_lip_pairs(lip_indices: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """All unordered pairs of the lip landmarks (780 for 40 points)."""
    return tuple(combinations(lip_indices, 2))


def default_stability_pairs(
    upper: tuple[int, ...], lower: tuple[int, ...]
) -> tuple[tuple[int, int], ...]:
    """Three (upper, lower) pairs at mouth center, left quarter, right quarter.

    Positions are fractions along each lip index list, so the rule works for
    any mesh whose lip rows are ordered left-to-right.
    """
    pairs = []
    for frac in (0.5, 0.25, 0.75):
        u = upper[round((len(upper) - 1) * frac)]
        v = lower[round((len(lower) - 1) * frac)]
        pairs.append((u, v))
    return tuple(pairs)


def load_topology(path: str | Path) -> FaceTopology:
    """Load and validate a topology data file.

    ``lip_pair_set`` and ``stability_pair_set`` are optional in the file;
    missing sets fall back to the canonical defaults.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise TopologyError(f"{path}: expected a JSON object")

    def index_list(key: str, required: bool = True) -> tuple[int, ...]:
        value = raw.get(key)
        if value is None:
            if required:
                raise TopologyError(f"{path}: missing key '{key}'")
            return ()
        if not isinstance(value, list) or not all(isinstance(i, int) for i in value):
            raise TopologyError(f"{path}: '{key}' must be a list of integers")
        return tuple(value)

    def pair_list(key: str) -> tuple[tuple[int, int], ...]:
        value = raw.get(key)
        if value is None:
            return ()
        pairs = []
        for entry in value:
            if not (isinstance(entry, list) and len(entry) == 2
                    and all(isinstance(i, int) for i in entry)):
                raise TopologyError(f"{path}: '{key}' entries must be [int, int] pairs")
            pairs.append((entry[0], entry[1]))
        return tuple(pairs)

    total = raw.get("total_points")
    if not isinstance(total, int):
        raise TopologyError(f"{path}: 'total_points' must be an integer")
    return FaceTopology(
        total_points=total,
        lip_indices=index_list("lip_indices"),
        upper_lip_indices=index_list("upper_lip_indices"),
        lower_lip_indices=index_list("lower_lip_indices"),
        left_eye_indices=index_list("left_eye_indices"),
        right_eye_indices=index_list("right_eye_indices"),
        left_brow_indices=index_list("left_brow_indices"),
        right_brow_indices=index_list("right_brow_indices"),
        lip_pair_set=pair_list("lip_pair_set"),
        stability_pair_set=pair_list("stability_pair_set"),
    )


def write_topology(path: str | Path, topology: FaceTopology) -> None:
    Path(path).write_text(
        json.dumps(topology.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
