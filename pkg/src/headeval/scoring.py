"""Ground-truth-relative scoring: per-metric normalization, dimension and
final scores, leaderboard assembly.

A model's raw metric value is scored by similarity to the ground-truth
value: ``s = 1 - |model - gt| / gt``, clamped to [0, 1]. A perfect match
scores 1; deviating by more than the ground-truth magnitude floors at 0.
The final score is the unweighted mean of the eight per-metric scores, and
each dimension score is the mean of its member metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .metrics import DIMENSIONS, METRIC_NAMES, MetricVector

#: Below this magnitude a ground-truth value is treated as exactly zero,
#: where the relative formula is singular.
DEGENERATE_GT_FLOOR = 1e-6


class DegenerateGtError(ValueError):
    """Negative ground-truth value; relative normalization is meaningless."""


def normalize_to_gt(model_value: float, gt_value: float) -> float:
    """Score a model's raw metric value against the ground truth.

    Returns ``1 - |model - gt| / gt`` clamped to [0, 1]. Near-zero ground
    truth (< 1e-6) is handled as an exact-zero target: 1.0 if the model is
    also near zero, else 0.0.
    """
    if gt_value < 0:
        raise DegenerateGtError(f"ground-truth value must be >= 0, got {gt_value}")
    if gt_value < DEGENERATE_GT_FLOOR:
        return 1.0 if abs(model_value) < DEGENERATE_GT_FLOOR else 0.0
    s = 1.0 - abs(model_value - gt_value) / gt_value
    return min(1.0, max(0.0, s))


@dataclass(frozen=True)
class NormalizedScoreCard:
    """Per-model normalized scores over a corpus.

    ``per_metric`` maps metric name to its [0, 1] score, or ``None`` when the
    metric was inapplicable on every video. ``final_score`` is the mean of
    the available per-metric scores; each dimension score is the mean of its
    available members.
    """

    model_id: str
    per_metric: dict[str, float | None]
    quality: float | None
    naturalness: float | None
    synchronization: float | None
    final_score: float
    videos_used: int
    inapplicable_counts: dict[str, int] = field(default_factory=dict)

    @property
    def excluded_metrics(self) -> tuple[str, ...]:
        return tuple(m for m in METRIC_NAMES if self.per_metric.get(m) is None)

    def dimension(self, name: str) -> float | None:
        return {"quality": self.quality, "naturalness": self.naturalness,
                "synchronization": self.synchronization}[name]

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "per_metric": {m: self.per_metric.get(m) for m in METRIC_NAMES},
            "dimensions": {
                "quality": self.quality,
                "naturalness": self.naturalness,
                "synchronization": self.synchronization,
            },
            "final_score": self.final_score,
            "videos_used": self.videos_used,
            "inapplicable_counts": dict(sorted(self.inapplicable_counts.items())),
            "excluded_metrics": list(self.excluded_metrics),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "NormalizedScoreCard":
        dims = raw.get("dimensions", {})
        return cls(
            model_id=raw["model_id"],
            per_metric=dict(raw["per_metric"]),
            quality=dims.get("quality"),
            naturalness=dims.get("naturalness"),
            synchronization=dims.get("synchronization"),
            final_score=raw["final_score"],
            videos_used=raw.get("videos_used", 0),
            inapplicable_counts=dict(raw.get("inapplicable_counts", {})),
        )


def _mean_or_none(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return float(np.mean(present))


def scorecard_from_scores(
    model_id: str,
    per_metric: Mapping[str, float | None],
    videos_used: int = 0,
    inapplicable_counts: Mapping[str, int] | None = None,
) -> NormalizedScoreCard:
    """Assemble a scorecard from already-normalized per-metric scores."""
    scores = {m: per_metric.get(m) for m in METRIC_NAMES}
    available = [v for v in scores.values() if v is not None]
    if not available:
        raise ValueError(f"model {model_id!r}: no applicable metric scores")
    return NormalizedScoreCard(
        model_id=model_id,
        per_metric=scores,
        quality=_mean_or_none([scores[m] for m in DIMENSIONS["quality"]]),
        naturalness=_mean_or_none([scores[m] for m in DIMENSIONS["naturalness"]]),
        synchronization=_mean_or_none([scores[m] for m in DIMENSIONS["synchronization"]]),
        final_score=float(np.mean(available)),
        videos_used=videos_used,
        inapplicable_counts=dict(inapplicable_counts or {}),
    )


def aggregate_model(
    model_id: str,
    metric_vectors: Sequence[MetricVector],
    gt_vectors: Sequence[MetricVector],
    mode: Literal["corpus", "per_video"] = "corpus",
) -> NormalizedScoreCard:
    """Aggregate per-video raw metrics into one normalized scorecard.

    ``corpus`` mode (default) averages raw values over the corpus for the
    model and the ground truth independently, then normalizes once.
    ``per_video`` normalizes each aligned video pair and averages the
    scores; it requires the two vector lists to be aligned by video.
    A metric inapplicable everywhere is excluded from the means and listed
    in ``excluded_metrics``.
    """
    if not metric_vectors or not gt_vectors:
        raise ValueError("metric_vectors and gt_vectors must be non-empty")
    if mode == "per_video" and len(metric_vectors) != len(gt_vectors):
        raise ValueError("per_video mode requires aligned vector lists")

    per_metric: dict[str, float | None] = {}
    inapplicable: dict[str, int] = {}
    for name in METRIC_NAMES:
        model_vals = [getattr(v, name) for v in metric_vectors]
        gt_vals = [getattr(v, name) for v in gt_vectors]
        inapplicable[name] = sum(1 for v in model_vals if v is None)
        if mode == "corpus":
            model_present = [v for v in model_vals if v is not None]
            gt_present = [v for v in gt_vals if v is not None]
            if not model_present or not gt_present:
                per_metric[name] = None
                continue
            per_metric[name] = normalize_to_gt(
                float(np.mean(model_present)), float(np.mean(gt_present))
            )
        else:
            pair_scores = [
                normalize_to_gt(m, g)
                for m, g in zip(model_vals, gt_vals)
                if m is not None and g is not None
            ]
            per_metric[name] = float(np.mean(pair_scores)) if pair_scores else None

    return scorecard_from_scores(
        model_id,
        per_metric,
        videos_used=len(metric_vectors),
        inapplicable_counts=inapplicable,
    )


@dataclass(frozen=True)
class Leaderboard:
    """Score cards ordered by final score (desc), ties broken by model id."""

    cards: tuple[NormalizedScoreCard, ...]

    def to_dict(self) -> dict:
        return {
            "ranking": [
                {"rank": i + 1, "model_id": c.model_id, "final_score": c.final_score}
                for i, c in enumerate(self.cards)
            ],
            "cards": [c.to_dict() for c in self.cards],
        }

    def render_text(self) -> str:
        headers = (
            ["model"]
            + [m for dim in ("quality", "synchronization", "naturalness")
               for m in DIMENSIONS[dim]]
            + ["final"]
        )
        rows = []
        for card in self.cards:
            row = [card.model_id]
            for dim in ("quality", "synchronization", "naturalness"):
                for m in DIMENSIONS[dim]:
                    value = card.per_metric.get(m)
                    row.append("-" if value is None else f"{value:.4f}")
            row.append(f"{card.final_score:.4f}")
            rows.append(row)
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        lines = [
            "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
            "  ".join("-" * w for w in widths),
        ]
        lines.extend(
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
            for row in rows
        )
        return "\n".join(lines)


def build_leaderboard(cards: Sequence[NormalizedScoreCard]) -> Leaderboard:
    """Order cards by final score descending, ties lexicographic by id."""
    if not cards:
        raise ValueError("at least one scorecard is required")
    ordered = sorted(cards, key=lambda c: (-c.final_score, c.model_id))
    return Leaderboard(cards=tuple(ordered))
