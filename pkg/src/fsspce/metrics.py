"""Accuracy metrics and run aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError


def relative_error(reference_sd, estimate_sd):
    """|reference - estimate| / reference."""
    if not reference_sd > 0:
        raise ParameterError(f"reference standard deviation must be positive, got {reference_sd}")
    return abs(reference_sd - estimate_sd) / reference_sd


def kl_divergence_knn(true_samples, model_samples, k=1):
    """k-nearest-neighbour estimate of KL(true || model) for scalar samples.

    ``(1/N) sum_i log(nu_k(i) / rho_k(i)) + log(M / (N - 1))`` where rho_k(i)
    is the distance from true sample i to its k-th neighbour among the other
    true samples and nu_k(i) to its k-th neighbour among the model samples.
    The estimate can be slightly negative. Returns ``inf`` when the model
    samples are degenerate (constant or non-finite) or some nu_k(i) is zero
    while rho_k(i) is not. True samples with rho_k(i) = 0 (exact ties) are
    left out of the average.
    """
    x = np.asarray(true_samples, dtype=float).reshape(-1)
    z = np.asarray(model_samples, dtype=float).reshape(-1)
    k = int(k)
    if k < 1:
        raise ParameterError("k must be >= 1")
    n, m = len(x), len(z)
    if n < k + 1 or m < k + 1:
        raise ParameterError(f"need at least {k + 1} samples in each set")
    if not np.isfinite(x).all():
        raise ParameterError("true samples must be finite")
    if not np.isfinite(z).all() or np.ptp(z) == 0:
        return math.inf

    rho = cKDTree(x[:, None]).query(x[:, None], k=k + 1)[0][:, k]
    nu = cKDTree(z[:, None]).query(x[:, None], k=k)[0]
    if k > 1:
        nu = nu[:, k - 1]
    use = rho > 0
    if np.any(nu[use] == 0):
        return math.inf
    if not use.any():
        return math.inf
    return float(np.mean(np.log(nu[use] / rho[use])) + math.log(m / (n - 1)))


@dataclass(frozen=True)
class Aggregate:
    mean: float
    se: float
    infinite: bool = False


def summarize_runs(values):
    """Mean and standard error (sd / sqrt(count)); any infinite value flags the whole set."""
    vals = [float(v) for v in values]
    if not vals:
        raise ParameterError("no values to summarize")
    if any(math.isinf(v) or math.isnan(v) for v in vals):
        return Aggregate(math.inf, math.inf, True)
    a = np.array(vals)
    se = float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
    return Aggregate(float(a.mean()), se, False)


@dataclass
class RunSummary:
    sd_estimate: float
    relative_error: float | None
    kl_divergence: float
    wall_time: float | None
    warnings: list = field(default_factory=list)
