"""
Validating scores against human votes
=====================================

Win rates from a pairwise vote log, Spearman correlation with exact or
t-approximated p-values, and seeded percentile-bootstrap intervals.
"""

import numpy as np

from headeval import PairedSeries, correlate, spearman_pvalue, spearman_rho, win_rates
from headeval.votes import VoteRecord

rng = np.random.default_rng(7)

# Ten models with hidden "true" strengths drive 600 simulated votes.
models = [f"model_{i:02d}" for i in range(10)]
strength = dict(zip(models, np.linspace(0.2, 0.9, 10)))

votes = []
for i in range(600):
    a, b = rng.choice(10, size=2, replace=False)
    left, right = models[a], models[b]
    p_left = strength[left] / (strength[left] + strength[right])
    choice = "left" if rng.random() < p_left else "right"
    votes.append(VoteRecord(pair_id=f"p{i}", video_id="v", left_method=left,
                            right_method=right, choice=choice,
                            issued_at=0.0, voted_at=1.0, session_id="demo"))

rates = win_rates(votes, models)
for m in models:
    print(f"{m}: {rates[m].wins:3d}/{rates[m].appearances:3d} -> {rates[m].rate:.3f}")

# Correlate hidden strength with the observed win rates.
series = PairedSeries(
    labels=tuple(models),
    x=[strength[m] for m in models],
    y=[rates[m].rate for m in models],
)
rho = spearman_rho(series)
print(f"\nrho = {rho:.3f}, p = {spearman_pvalue(rho, series.n):.5f}")

result = correlate(series, resamples=10_000, seed=42)
print(f"95% bootstrap CI: [{result.ci_low:.3f}, {result.ci_high:.3f}] "
      f"({result.resamples} resamples, {result.degenerate_resamples} degenerate)")
