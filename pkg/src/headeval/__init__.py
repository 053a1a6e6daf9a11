"""Fine-grained evaluation of generated talking-head videos.

Per-frame facial-landmark, head-pose, image-quality, and audio signals feed
eight metrics across quality, naturalness, and synchronization; scores are
normalized against a ground-truth reference and averaged into a single
final score. The package also ships the human-study side: a pairwise vote
service, win rates, and rank-correlation statistics with bootstrap
confidence intervals.
"""

from .audio import FrameSets, FrameVolumeSeries, derive_frame_sets, energy_vad_fallback, frame_rms
from .features import (
    FeatureBundle,
    IqaFrame,
    LandmarkFrame,
    PoseFrame,
    VadSegment,
    load_feature_bundle,
    validate_bundle,
    write_feature_bundle,
)
from .metrics import DIMENSIONS, METRIC_NAMES, MetricVector, evaluate_video
from .scoring import (
    Leaderboard,
    NormalizedScoreCard,
    aggregate_model,
    build_leaderboard,
    normalize_to_gt,
    scorecard_from_scores,
)
from .stats import (
    CorrelationResult,
    PairedSeries,
    bootstrap_ci,
    correlate,
    spearman_pvalue,
    spearman_rho,
    win_rates,
)
from .topology import FaceTopology, load_topology
from .votes import VoteRecord

__version__ = "0.1.0"

__all__ = [
    "DIMENSIONS",
    "METRIC_NAMES",
    "CorrelationResult",
    "FaceTopology",
    "FeatureBundle",
    "FrameSets",
    "FrameVolumeSeries",
    "IqaFrame",
    "LandmarkFrame",
    "Leaderboard",
    "MetricVector",
    "NormalizedScoreCard",
    "PairedSeries",
    "PoseFrame",
    "VadSegment",
    "VoteRecord",
    "aggregate_model",
    "bootstrap_ci",
    "build_leaderboard",
    "correlate",
    "derive_frame_sets",
    "energy_vad_fallback",
    "evaluate_video",
    "frame_rms",
    "load_feature_bundle",
    "load_topology",
    "normalize_to_gt",
    "scorecard_from_scores",
    "spearman_pvalue",
    "spearman_rho",
    "validate_bundle",
    "win_rates",
    "write_feature_bundle",
]
