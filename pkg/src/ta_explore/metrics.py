"""Curve statistics shared by the harness and the acceptance checks."""

from __future__ import annotations

import numpy as np


def moving_average(series, window: int = 50) -> np.ndarray:
    """Trailing mean; the first ``window - 1`` entries average what is available."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        return x.copy()
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(x.size)
    lo = np.maximum(0, idx - window + 1)
    return (csum[idx + 1] - csum[lo]) / (idx + 1 - lo)


def episodes_to_threshold(curve, threshold: float, maximize: bool, window: int = 50) -> int | None:
    """First episode whose moving average reaches ``threshold`` (None if never)."""
    ma = moving_average(curve, window)
    hit = ma >= threshold if maximize else ma <= threshold
    idx = np.flatnonzero(hit)
    return int(idx[0]) if idx.size else None


def plateau(curve, tail: int = 1000) -> float:
    """Mean over the last ``tail`` episodes (all of them if shorter)."""
    x = np.asarray(curve, dtype=float)
    return float(x[-min(tail, x.size):].mean())


def baseline_threshold(baseline_curve, maximize: bool, tail: int = 1000, fraction: float = 0.95) -> float:
    """A level within ``1 - fraction`` of the baseline's plateau, on the worse side.

    For rewards this is ``plateau - 0.05 |plateau|``; for errors
    ``plateau + 0.05 |plateau|``.
    """
    p = plateau(baseline_curve, tail)
    slack = (1.0 - fraction) * abs(p)
    return p - slack if maximize else p + slack


def trend_slope(y, x=None) -> float:
    """Least-squares slope of ``y`` against ``x`` (defaults to 0..n-1)."""
    y = np.asarray(y, dtype=float)
    x = np.arange(y.size, dtype=float) if x is None else np.asarray(x, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
