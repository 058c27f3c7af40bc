"""Evaluation metrics: state-estimation MSE and kernel MMD between samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import InvalidInputError
from .filters import ParticleEnsemble
from .validation import as_generator


@dataclass(frozen=True)
class MetricSeries:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise InvalidInputError(f"times and values must align, got {t.shape} vs {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("metric values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _point_estimate(entry) -> np.ndarray:
    if isinstance(entry, ParticleEnsemble):
        return entry.mean()
    return np.asarray(entry, dtype=float)


def mse(ensembles: Sequence, truth: Sequence, times: Sequence | None = None, label: str = "mse") -> MetricSeries:
    """Squared error of the (weighted) posterior mean against the true state,
    one value per time. Entries may be ensembles or precomputed mean vectors."""
    if len(ensembles) != len(truth):
        raise InvalidInputError(f"got {len(ensembles)} estimates for {len(truth)} true states")
    values = np.array(
        [float(np.sum((_point_estimate(e) - np.asarray(x, dtype=float)) ** 2)) for e, x in zip(ensembles, truth)]
    )
    t = np.arange(len(values)) if times is None else np.asarray(times)
    return MetricSeries(times=t, values=values, label=label)


def mmd(sample_a, sample_b, bandwidth: float) -> float:
    """Gaussian-kernel maximum mean discrepancy between two samples.

    Uses the biased V-statistic (diagonal included), which is nonnegative,
    and returns its square root. The kernel is exp(-||x - x'||^2 / (2 h^2)).
    """
    a = np.atleast_2d(np.asarray(sample_a, dtype=float))
    b = np.atleast_2d(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("samples must be nonempty")
    if a.shape[1] != b.shape[1]:
        raise InvalidInputError(f"sample dimensions disagree: {a.shape[1]} vs {b.shape[1]}")
    if not bandwidth > 0:
        raise InvalidInputError(f"bandwidth must be > 0, got {bandwidth}")
    scale = 2.0 * bandwidth * bandwidth
    k_aa = np.exp(-cdist(a, a, "sqeuclidean") / scale).mean()
    k_bb = np.exp(-cdist(b, b, "sqeuclidean") / scale).mean()
    k_ab = np.exp(-cdist(a, b, "sqeuclidean") / scale).mean()
    return float(np.sqrt(max(k_aa + k_bb - 2.0 * k_ab, 0.0)))


def median_heuristic_bandwidth(pooled, max_points: int = 2000, seed=0) -> float:
    """Median pairwise distance of the pooled sample (subsampled for cost);
    falls back to 1.0 when the median vanishes."""
    x = np.atleast_2d(np.asarray(pooled, dtype=float))
    if x.shape[0] < 2:
        raise InvalidInputError("need at least 2 samples for the median heuristic")
    if x.shape[0] > max_points:
        idx = as_generator(seed).choice(x.shape[0], size=max_points, replace=False)
        x = x[idx]
    h = float(np.median(pdist(x)))
    return h if h > 0 else 1.0


def time_average(series: MetricSeries, from_t=None) -> float:
    """Mean of the series over times t >= from_t (whole series by default)."""
    if from_t is None:
        tail = series.values
    else:
        tail = series.values[np.asarray(series.times) >= from_t]
    if tail.size == 0:
        raise InvalidInputError(f"no metric values at or after t = {from_t}")
    return float(tail.mean())
