"""Evaluation and correlation pipelines behind the CLI.

Both report builders are deterministic: given identical inputs and seeds
they produce byte-identical JSON (sorted keys, no wall-clock content).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Sequence

from .features import load_feature_bundle
from .manifest import CorpusManifest
from .metrics import DIMENSIONS, METRIC_NAMES, MetricVector, evaluate_video
from .scoring import NormalizedScoreCard, aggregate_model, build_leaderboard
from .stats import (
    DEFAULT_RESAMPLES,
    PairedSeries,
    bootstrap_ci,
    correlate,
    spearman_pvalue,
    spearman_rho,
    win_rates,
)
from .topology import FaceTopology
from .votes import VoteRecord

EVALUATION_SCHEMA = "headeval.evaluation_report/v1"
CORRELATION_SCHEMA = "headeval.correlation_report/v1"


class PipelineError(RuntimeError):
    pass


def _evaluate_dir(args: tuple[Path, FaceTopology]) -> MetricVector:
    directory, topo = args
    bundle = load_feature_bundle(directory, topo)
    return evaluate_video(bundle, topo)


def evaluate_corpus(
    manifest: CorpusManifest,
    topology: FaceTopology,
    workers: int = 1,
    mode: str = "corpus",
) -> dict:
    """Evaluate every model (and the ground truth) over the common videos.

    Videos that fail to load for one model are recorded under ``failures``
    and excluded from that model's aggregation; a model with zero usable
    videos, or any ground-truth failure, aborts the run.
    """
    labels = {"ground_truth": manifest.gt_dir, **manifest.model_dirs}
    per_video: dict[str, dict[str, MetricVector]] = {}
    failures: dict[str, dict[str, str]] = {}

    for label, directory in labels.items():
        jobs = [(directory / vid, topology) for vid in manifest.video_ids]
        vectors: dict[str, MetricVector] = {}
        errors: dict[str, str] = {}
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_try_evaluate, jobs))
        else:
            results = [_try_evaluate(job) for job in jobs]
        for vid, outcome in zip(manifest.video_ids, results):
            if isinstance(outcome, MetricVector):
                vectors[vid] = outcome
            else:
                errors[vid] = outcome
        if errors:
            failures[label] = errors
        if not vectors:
            raise PipelineError(f"model {label!r}: no video could be evaluated")
        per_video[label] = vectors

    if "ground_truth" in failures:
        bad = ", ".join(sorted(failures["ground_truth"]))
        raise PipelineError(f"ground truth failed on: {bad} (normalization impossible)")

    cards = []
    for label in labels:
        usable = [vid for vid in manifest.video_ids if vid in per_video[label]]
        model_vecs = [per_video[label][vid] for vid in usable]
        gt_vecs = [per_video["ground_truth"][vid] for vid in usable]
        cards.append(aggregate_model(label, model_vecs, gt_vecs, mode=mode))

    leaderboard = build_leaderboard(cards)
    return {
        "schema": EVALUATION_SCHEMA,
        "video_ids": list(manifest.video_ids),
        "videos": {
            label: {vid: vec.as_dict() for vid, vec in sorted(vectors.items())}
            for label, vectors in sorted(per_video.items())
        },
        "failures": {k: dict(sorted(v.items())) for k, v in sorted(failures.items())},
        "cards": [card.to_dict() for card in leaderboard.cards],
        "ranking": leaderboard.to_dict()["ranking"],
    }


def _try_evaluate(job: tuple[Path, FaceTopology]) -> "MetricVector | str":
    try:
        return _evaluate_dir(job)
    except Exception as exc:  # report and continue; one bad video is data
        return f"{type(exc).__name__}: {exc}"


def cards_from_report(report: Mapping) -> list[NormalizedScoreCard]:
    cards_raw = report.get("cards")
    if not isinstance(cards_raw, list) or not cards_raw:
        raise PipelineError("report has no 'cards' section")
    return [NormalizedScoreCard.from_dict(c) for c in cards_raw]


def _vote_level_ci(
    x_by_model: dict[str, float],
    votes: Sequence[VoteRecord],
    resamples: int,
    seed: int,
    level: float = 0.95,
) -> tuple[float, float, int]:
    """Percentile interval with votes (not model points) as the bootstrap unit.

    Each resample redraws the vote log with replacement, recomputes win
    rates, and correlates them with the fixed scores. Resamples where fewer
    than three models appear, or a column is constant, are skipped and
    counted.
    """
    import numpy as np

    from .stats import average_ranks, _rho_from_ranks, ConstantSeriesError

    models = sorted(x_by_model)
    index = {m: i for i, m in enumerate(models)}
    k = len(models)
    relevant = [v for v in votes
                if v.left_method in index and v.right_method in index]
    if not relevant:
        raise PipelineError("no votes reference the scored models")
    left = np.array([index[v.left_method] for v in relevant])
    right = np.array([index[v.right_method] for v in relevant])
    winner = np.array([index[v.winner] for v in relevant])
    xs = np.array([x_by_model[m] for m in models])

    rng = np.random.default_rng(seed)
    draws = rng.integers(0, len(relevant), size=(resamples, len(relevant)))
    rhos = []
    degenerate = 0
    for row in draws:
        appearances = np.bincount(left[row], minlength=k) + np.bincount(
            right[row], minlength=k)
        wins = np.bincount(winner[row], minlength=k)
        present = appearances > 0
        if int(present.sum()) < 3:
            degenerate += 1
            continue
        rates = wins[present] / appearances[present]
        try:
            rho = _rho_from_ranks(average_ranks(xs[present]), average_ranks(rates))
        except ConstantSeriesError:
            degenerate += 1
            continue
        rhos.append(rho)
    if not rhos:
        raise PipelineError("every vote-level resample was degenerate")
    alpha = (1.0 - level) / 2.0
    low, high = np.percentile(rhos, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(low), float(high), degenerate


def correlation_report(
    cards: Sequence[NormalizedScoreCard],
    votes: Sequence[VoteRecord],
    seed: int,
    resamples: int = DEFAULT_RESAMPLES,
    resample_unit: str = "models",
) -> dict:
    """Correlate every score column with human win rates.

    One row per metric, per dimension, and for the final score. At least
    three models must appear in both the cards and the vote log.
    ``resample_unit`` picks the bootstrap unit for the intervals: paired
    model points (default) or individual votes.
    """
    if resample_unit not in ("models", "votes"):
        raise PipelineError(f"resample_unit must be models|votes, got {resample_unit!r}")
    if not votes:
        raise PipelineError("vote log contains no votes")
    methods = sorted({v.left_method for v in votes} | {v.right_method for v in votes})
    rates = win_rates(votes, methods)
    by_model = {c.model_id: c for c in cards}
    common = [m for m in methods if m in by_model and rates[m].rate is not None]
    if len(common) < 3:
        raise PipelineError(
            f"need at least 3 models common to report and votes, got {len(common)}"
        )

    def column(name: str) -> list[tuple[str, float]]:
        points = []
        for m in common:
            card = by_model[m]
            if name == "final_score":
                value = card.final_score
            elif name in DIMENSIONS:
                value = card.dimension(name)
            else:
                value = card.per_metric.get(name)
            if value is not None:
                points.append((m, value))
        return points

    rows = []
    row_names = list(METRIC_NAMES) + list(DIMENSIONS) + ["final_score"]
    for i, name in enumerate(row_names):
        points = column(name)
        if len(points) < 3:
            rows.append({"name": name, "skipped": f"only {len(points)} models scored"})
            continue
        series = PairedSeries(
            labels=tuple(m for m, _ in points),
            x=[v for _, v in points],
            y=[rates[m].rate for m, _ in points],
        )
        rho = spearman_rho(series)
        p_value = spearman_pvalue(rho, series.n) if series.n >= 4 else None
        if resample_unit == "votes":
            ci_low, ci_high, degenerate = _vote_level_ci(
                dict(points), votes, resamples, seed + i)
        elif series.n >= 4:
            result = correlate(series, resamples=resamples, seed=seed + i)
            ci_low, ci_high = result.ci_low, result.ci_high
            degenerate = result.degenerate_resamples
        else:  # three points: coefficient and interval, but no test
            ci_low, ci_high = bootstrap_ci(series, resamples=resamples, seed=seed + i)
            degenerate = 0
        rows.append({
            "name": name,
            "rho": rho,
            "p_value": p_value,
            "ci_low": ci_low,
            "ci_high": ci_high,
            "n": series.n,
            "degenerate_resamples": degenerate,
        })

    return {
        "schema": CORRELATION_SCHEMA,
        "seed": seed,
        "resamples": resamples,
        "resample_unit": resample_unit,
        "n_votes": len(votes),
        "models": common,
        "win_rates": {
            m: {"appearances": rates[m].appearances, "wins": rates[m].wins,
                "win_rate": rates[m].rate}
            for m in methods
        },
        "rows": rows,
    }


def write_report(path: str | Path, report: Mapping) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
