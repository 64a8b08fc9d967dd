"""Shared numerical helpers: fixed-panel Simpson quadrature, compensated
window sums and the exact one-sample Kolmogorov-Smirnov statistic."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


def composite_simpson(f: Callable, a: float, b: float, panels: int) -> float:
    """Integrate ``f`` over ``[a, b]`` with a fixed number of parabolic panels.

    ``f`` must accept a numpy array; the rule evaluates on 2*panels + 1
    equispaced nodes, so results are deterministic for a given panel count.
    """
    if panels < 1:
        raise ValueError("panels must be a positive integer")
    if b < a:
        raise ValueError("integration bounds must satisfy a <= b")
    x = np.linspace(a, b, 2 * panels + 1)
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    step = (b - a) / (2 * panels)
    total = y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2])
    return float(total * step / 3.0)


def window_sum(values: Sequence[float] | np.ndarray) -> float:
    """Exactly rounded sum of the values in ascending index order.

    Backed by ``math.fsum`` so the result does not depend on platform
    reduction order; used for all estimator window averages.
    """
    arr = np.asarray(values, dtype=float)
    return math.fsum(arr.tolist())


def ks_statistic(sample: np.ndarray, cdf: Callable) -> float:
    """Exact one-sample Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)|.

    Ties are handled by right-continuity of the empirical CDF: both the
    upper (i/n) and lower ((i-1)/n) step values are compared at each
    sorted sample point.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1, dtype=float) / n
    d_plus = np.max(upper - f)
    d_minus = np.max(f - (upper - 1.0 / n))
    return float(max(d_plus, d_minus))
