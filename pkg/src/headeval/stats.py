"""Rank-correlation machinery for validating metrics against human votes.

Spearman's coefficient is computed as the Pearson correlation of
average-tied ranks. P-values use the exact permutation distribution for
small samples (n <= 9) and the t approximation with n - 2 degrees of
freedom otherwise. Confidence intervals come from a seeded percentile
bootstrap over the paired (score, win-rate) points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np
from scipy.stats import t as t_dist

EXACT_PVALUE_MAX_N = 9
DEFAULT_RESAMPLES = 10_000


class ConstantSeriesError(ValueError):
    """A correlation input was constant; ranks carry no information."""


class CiUnavailableError(RuntimeError):
    """Every bootstrap resample was degenerate; no interval exists."""


@dataclass(frozen=True)
class PairedSeries:
    """Aligned model-level points: scores ``x`` against win rates ``y``."""

    labels: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if len(self.labels) != x.size or x.size != y.size:
            raise ValueError("labels, x, and y must have equal length")
        if x.size < 3:
            raise ValueError(f"need at least 3 paired points, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("paired series values must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class CorrelationResult:
    """One row of a correlation report."""

    rho: float
    p_value: float
    ci_low: float
    ci_high: float
    resamples: int
    n: int
    degenerate_resamples: int = 0


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the average of their ranks.

    Accepts a 1-D array or a 2-D array ranked row-wise.
    """
    values = np.asarray(values, dtype=np.float64)
    one_dim = values.ndim == 1
    rows = values[None, :] if one_dim else values
    n = rows.shape[1]
    order = np.argsort(rows, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(rows, order, axis=1)
    ranks = np.empty_like(rows)
    base = np.arange(1, n + 1, dtype=np.float64)
    for r in range(rows.shape[0]):
        row_ranks = base.copy()
        vals = sorted_vals[r]
        i = 0
        while i < n:
            j = i
            while j + 1 < n and vals[j + 1] == vals[i]:
                j += 1
            if j > i:
                row_ranks[i : j + 1] = (i + j + 2) / 2.0
            i = j + 1
        ranks[r, order[r]] = row_ranks
    return ranks[0] if one_dim else ranks


def _rho_from_ranks(rx: np.ndarray, ry: np.ndarray) -> float:
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise ConstantSeriesError("correlation undefined for a constant series")
    return float(rx @ ry) / denom


def spearman_rho(series: PairedSeries) -> float:
    """Spearman's rank correlation coefficient in [-1, 1].

    Invariant under strictly increasing transforms of either side, and
    symmetric in its arguments. Raises ``ConstantSeriesError`` when either
    side is constant.
    """
    return _rho_from_ranks(average_ranks(series.x), average_ranks(series.y))


def spearman_pvalue(rho: float, n: int) -> float:
    """Two-sided p-value for an observed coefficient at sample size ``n``.

    For n <= 9 the exact permutation distribution over all n! orderings is
    enumerated; larger samples use t = rho * sqrt((n-2)/(1-rho^2)) with
    n - 2 degrees of freedom. A |rho| of exactly 1 under the t branch lies
    below the floating-point floor; 0.0 is returned with a warning.
    """
    if n < 4:
        raise ValueError(f"need n >= 4 for a meaningful p-value, got {n}")
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    if n <= EXACT_PVALUE_MAX_N:
        base = np.arange(1, n + 1, dtype=np.float64)
        perms = np.array(list(permutations(range(n))), dtype=np.intp)
        permuted = base[perms]
        bx = base - base.mean()
        by = permuted - permuted.mean(axis=1, keepdims=True)
        denom = math.sqrt(float(bx @ bx)) * np.sqrt((by * by).sum(axis=1))
        rhos = (by @ bx) / denom
        hits = int(np.count_nonzero(np.abs(rhos) >= abs(rho) - 1e-12))
        return hits / len(perms)
    if abs(rho) >= 1.0:
        warnings.warn(
            "p-value below the floating-point floor for |rho| = 1; reporting 0.0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * t_dist.sf(abs(t_stat), df=n - 2))


def _bootstrap_rhos(
    series: PairedSeries, resamples: int, seed: int
) -> tuple[np.ndarray, int]:
    """Bootstrap coefficient samples and the count of degenerate draws.

    The resampling scheme is part of the reproducibility contract: indices
    are ``default_rng(seed).integers(0, n, size=(resamples, n))``, rows with
    a constant column are dropped.
    """
    rng = np.random.default_rng(seed)
    n = series.n
    idx = rng.integers(0, n, size=(resamples, n))
    xs = series.x[idx]
    ys = series.y[idx]
    keep = (np.ptp(xs, axis=1) > 0) & (np.ptp(ys, axis=1) > 0)
    xs, ys = xs[keep], ys[keep]
    if xs.shape[0] == 0:
        return np.empty(0), resamples
    rx = average_ranks(xs)
    ry = average_ranks(ys)
    rx = rx - rx.mean(axis=1, keepdims=True)
    ry = ry - ry.mean(axis=1, keepdims=True)
    denom = np.sqrt((rx * rx).sum(axis=1) * (ry * ry).sum(axis=1))
    rhos = (rx * ry).sum(axis=1) / denom
    return rhos, resamples - xs.shape[0]


def bootstrap_ci(
    series: PairedSeries,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = 0.95,
    seed: int = 0,
    method: str = "percentile",
) -> tuple[float, float]:
    """Bootstrap confidence interval for the rank correlation.

    Draws ``resamples`` with-replacement resamples of the paired points,
    skipping degenerate draws (a constant column). ``method`` selects the
    plain percentile interval (default) or the bias-corrected accelerated
    (BCa) variant. Deterministic for a fixed seed.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    rhos, _ = _bootstrap_rhos(series, resamples, seed)
    if rhos.size == 0:
        raise CiUnavailableError(
            f"all {resamples} resamples were degenerate; no interval available"
        )
    alpha = (1.0 - level) / 2.0
    if method == "percentile":
        quantiles = (alpha, 1.0 - alpha)
    elif method == "bca":
        quantiles = _bca_quantiles(series, rhos, alpha)
    else:
        raise ValueError(f"method must be 'percentile' or 'bca', got {method!r}")
    low, high = np.percentile(rhos, [100.0 * quantiles[0], 100.0 * quantiles[1]])
    return float(low), float(high)


def _bca_quantiles(
    series: PairedSeries, rhos: np.ndarray, alpha: float
) -> tuple[float, float]:
    """Bias-corrected accelerated quantile levels (jackknife acceleration)."""
    from scipy.stats import norm

    rho_hat = spearman_rho(series)
    below = float(np.mean(rhos < rho_hat))
    below = min(max(below, 1.0 / (len(rhos) + 1)), 1.0 - 1.0 / (len(rhos) + 1))
    z0 = float(norm.ppf(below))

    jack = []
    mask = np.ones(series.n, dtype=bool)
    for i in range(series.n):
        mask[i] = False
        x, y = series.x[mask], series.y[mask]
        mask[i] = True
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            continue
        jack.append(_rho_from_ranks(average_ranks(x), average_ranks(y)))
    jack = np.asarray(jack)
    if jack.size < 3:
        acceleration = 0.0
    else:
        dev = jack.mean() - jack
        denom = 6.0 * float(np.sum(dev * dev)) ** 1.5
        acceleration = float(np.sum(dev**3)) / denom if denom > 0 else 0.0

    def adjusted(q: float) -> float:
        z = float(norm.ppf(q))
        num = z0 + z
        level = norm.cdf(z0 + num / (1.0 - acceleration * num))
        return float(min(max(level, 0.0), 1.0))

    return adjusted(alpha), adjusted(1.0 - alpha)


def correlate(
    series: PairedSeries,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = 0.95,
    seed: int = 0,
) -> CorrelationResult:
    """Full correlation row: coefficient, p-value, and bootstrap interval."""
    rho = spearman_rho(series)
    rhos, n_degenerate = _bootstrap_rhos(series, resamples, seed)
    if rhos.size == 0:
        raise CiUnavailableError(
            f"all {resamples} resamples were degenerate; no interval available"
        )
    alpha = (1.0 - level) / 2.0
    low, high = np.percentile(rhos, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return CorrelationResult(
        rho=rho,
        p_value=spearman_pvalue(rho, series.n),
        ci_low=float(low),
        ci_high=float(high),
        resamples=resamples,
        n=series.n,
        degenerate_resamples=n_degenerate,
    )


class PairwiseVote(Protocol):
    """Minimal record shape for win-rate tallies."""

    pair_id: str
    left_method: str
    right_method: str
    choice: str


@dataclass(frozen=True)
class WinRate:
    appearances: int
    wins: int

    @property
    def rate(self) -> float | None:
        if self.appearances == 0:
            return None
        return self.wins / self.appearances


def win_rates(
    votes: Iterable[PairwiseVote], methods: Sequence[str]
) -> Mapping[str, WinRate]:
    """Per-method win rate: wins / appearances over all pairwise votes.

    Methods never shown keep ``rate = None`` so callers can flag them.
    A vote naming an unknown method or an unknown side is rejected with its
    record id.
    """
    appearances = {m: 0 for m in methods}
    wins = {m: 0 for m in methods}
    for vote in votes:
        for method in (vote.left_method, vote.right_method):
            if method not in appearances:
                raise ValueError(
                    f"vote {vote.pair_id!r} names unknown method {method!r}"
                )
        if vote.choice == "left":
            winner = vote.left_method
        elif vote.choice == "right":
            winner = vote.right_method
        else:
            raise ValueError(
                f"vote {vote.pair_id!r} has invalid choice {vote.choice!r}"
            )
        appearances[vote.left_method] += 1
        appearances[vote.right_method] += 1
        wins[winner] += 1
    return {m: WinRate(appearances=appearances[m], wins=wins[m]) for m in methods}
