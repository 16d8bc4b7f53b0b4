"""Quadrature helpers shared by the table builders and balances."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Gauss-Legendre nodes and weights on [-1, 1].

    >>> nodes, weights = gauss_legendre(4)
    >>> round(float(weights.sum()), 12)
    2.0
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def log_grid(lower, upper, per_decade):
    """Logarithmic grid from ``lower`` to ``upper`` with ``per_decade`` intervals per decade.

    >>> grid = log_grid(1.0, 100.0, 2)
    >>> grid.size
    5
    """
    decades = np.log10(upper) - np.log10(lower)
    count = int(round(decades * per_decade)) + 1
    return np.logspace(np.log10(lower), np.log10(upper), count)


def trapezoid_weights(count, step):
    """Composite trapezoid weights for ``count`` equally spaced nodes."""
    weights = np.full(count, step)
    weights[0] = weights[-1] = 0.5 * step
    return weights


def cumulative_trapezoid(values, step, axis=-1):
    """Cumulative trapezoid integral along ``axis`` starting from zero."""
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    increments = 0.5 * step * (values[..., 1:] + values[..., :-1])
    out = np.concatenate([np.zeros(values.shape[:-1] + (1,)), np.cumsum(increments, axis=-1)], axis=-1)
    return np.moveaxis(out, -1, axis)
