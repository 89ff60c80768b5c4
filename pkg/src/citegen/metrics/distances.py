"""Scalar and distributional distances used by the metric battery."""

from __future__ import annotations

import numpy as np


class MetricError(ValueError):
    pass


def ape(x_synth: float, x_real: float) -> float:
    """Absolute percentage error |x_synth - x_real| / |x_real|."""
    if x_real == 0:
        raise MetricError("APE undefined for a zero reference value")
    return abs(x_synth - x_real) / abs(x_real)


def wasserstein1(a, b) -> float:
    """W1 between two empirical distributions.

    Equal-size samples reduce to the mean absolute difference of sorted
    values; otherwise the CDF-difference integral over the merged support
    is used, which equals the quantile-function integral.
    """
    a = np.sort(np.asarray(a, np.float64))
    b = np.sort(np.asarray(b, np.float64))
    if a.size == 0 or b.size == 0:
        raise MetricError("W1 needs non-empty samples")
    if a.size == b.size:
        return float(np.abs(a - b).mean())
    merged = np.concatenate([a, b])
    merged.sort(kind="mergesort")
    deltas = np.diff(merged)
    cdf_a = np.searchsorted(a, merged[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, merged[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * deltas))


def l1_triad(a, b) -> float:
    """L1 distance between two 16-class triad proportion vectors."""
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != (16,) or b.shape != (16,):
        raise MetricError("triad proportion vectors must have 16 entries")
    return float(np.abs(a - b).sum())
