"""Fitted constants and rates for bound checks."""
import numpy as np


def fitted_constant(values, bound):
    """Smallest C with |values| <= C * bound on the finite, positive-bound entries.

    >>> fitted_constant([1.0, -4.0], [1.0, 2.0])
    2.0
    """
    values = np.abs(np.asarray(values, dtype=float))
    bound = np.asarray(bound, dtype=float)
    mask = np.isfinite(values) & np.isfinite(bound) & (bound > 0.0)
    if not np.any(mask):
        return 0.0
    return float(np.max(values[mask] / bound[mask]))


def fitted_rate(x, y):
    """Slope of log y against log x over positive pairs (NaN when fewer than two)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0.0) & (y > 0.0) & np.isfinite(x) & np.isfinite(y)
    if np.count_nonzero(mask) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)
    return float(slope)


def geometric_ratio(deltas, tail=5):
    """Geometric mean of successive delta ratios over the last ``tail`` pairs."""
    deltas = np.asarray([value for value in deltas if value > 0.0], dtype=float)
    if deltas.size < 2:
        return 0.0
    ratios = deltas[1:] / deltas[:-1]
    ratios = ratios[-tail:]
    return float(np.exp(np.mean(np.log(ratios))))


def stability_ratio(values):
    """max/min of positive values; 1 means perfectly stable.

    >>> stability_ratio([2.0, 4.0])
    2.0
    """
    values = np.abs(np.asarray(values, dtype=float))
    values = values[np.isfinite(values) & (values > 0.0)]
    if values.size == 0:
        return float("nan")
    return float(values.max() / values.min())
