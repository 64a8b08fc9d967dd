"""Smoothness certification.

Two classes are certified numerically.  The global ball H(M, K, beta)
requires sup|S'| <= M and a Hoelder quotient of order beta - 1 on the
derivative bounded by K.  The local weak class at z0 with budget delta
allows derivatives up to 1/delta but requires the symmetrized window
integral |int_{-1}^{1} (S(z0 + h u) - S(z0)) du| <= delta * h^beta for
every bandwidth h; the "for every h" clause is probed on a finite
geometric grid, which is recorded in the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import FunctionSpec
from .numerics import composite_simpson

DEFECT_QUAD_PANELS = 4096
DEFAULT_SUP_RESOLUTION = 10_000
DEFAULT_H_COUNT = 32
DEFAULT_H_FACTOR = 0.7


def _validate_beta(beta: float) -> None:
    if not (1.0 < beta <= 2.0):
        raise ValueError(f"beta must lie in (1, 2], got {beta}")


@dataclass(frozen=True)
class HolderParams:
    """Parameters of the global ball: beta = 1 + alpha, derivative bound M,
    Hoelder constant K."""

    beta: float
    M: float
    K: float
    alpha: float = field(init=False)

    def __post_init__(self) -> None:
        _validate_beta(self.beta)
        if self.M <= 0 or self.K <= 0:
            raise ValueError("M and K must be positive")
        object.__setattr__(self, "alpha", self.beta - 1.0)


def default_h_grid(z0: float, count: int = DEFAULT_H_COUNT,
                   factor: float = DEFAULT_H_FACTOR) -> np.ndarray:
    """Geometric probe bandwidths from min(z0, 1-z0) shrinking by ``factor``."""
    if not (0.0 < z0 < 1.0):
        raise ValueError("z0 must lie in (0, 1)")
    if not (0.0 < factor < 1.0):
        raise ValueError("factor must lie in (0, 1)")
    h_max = min(z0, 1.0 - z0)
    return h_max * factor ** np.arange(count, dtype=float)


@dataclass(frozen=True)
class WeakHolderParams:
    """Local weak-class parameters at z0 with budget delta."""

    z0: float
    delta: float
    beta: float
    h_grid: np.ndarray = None  # defaults to the geometric grid below

    def __post_init__(self) -> None:
        if not (0.0 < self.z0 < 1.0):
            raise ValueError("z0 must lie in (0, 1)")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        _validate_beta(self.beta)
        grid = self.h_grid
        if grid is None:
            grid = default_h_grid(self.z0)
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0):
            raise ValueError("h_grid must contain positive bandwidths")
        lim = min(self.z0, 1.0 - self.z0)
        if np.any(grid > lim + 1e-15):
            raise ValueError("h_grid bandwidths must keep [z0-h, z0+h] in [0, 1]")
        object.__setattr__(self, "h_grid", grid)


@dataclass(frozen=True)
class HolderReport:
    within: bool
    sup_deriv: float
    holder_quotient: float
    M: float
    K: float
    resolution: int


@dataclass(frozen=True)
class WeakHolderReport:
    certified: bool
    sup_deriv: float
    deriv_bound: float
    max_defect: float
    defect_bound: float
    worst_h: float
    resolution: int
    quad_panels: int = DEFECT_QUAD_PANELS


def check_holder(S: FunctionSpec, p: HolderParams, resolution: int) -> HolderReport:
    """Grid certificate for membership in H(M, K, beta).

    Both suprema are taken over a uniform grid of ``resolution`` points on
    [0, 1]; the quotient scans all grid pairs in row blocks to bound memory.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    x = np.linspace(0.0, 1.0, resolution)
    d = np.asarray(S.deriv(x), dtype=float)
    if d.shape != x.shape:
        d = np.broadcast_to(d, x.shape).astype(float)
    sup_deriv = float(np.max(np.abs(d)))

    # Pairwise quotient in row blocks: for rows i in a block, scan all j > i.
    quotient = 0.0
    block = 256
    for start in range(0, resolution - 1, block):
        stop = min(start + block, resolution - 1)
        xi = x[start:stop][:, None]
        di = d[start:stop][:, None]
        xj = x[start + 1:][None, :]
        dj = d[start + 1:][None, :]
        dx = xj - xi
        valid = dx > 0
        q = np.where(valid,
                     np.abs(dj - di) / np.where(valid, dx, 1.0) ** p.alpha,
                     0.0)
        quotient = max(quotient, float(np.max(q)))
    within = sup_deriv <= p.M and quotient <= p.K
    return HolderReport(within=within, sup_deriv=sup_deriv,
                        holder_quotient=quotient, M=p.M, K=p.K,
                        resolution=resolution)


def weak_defect(S: FunctionSpec, z0: float, beta: float, h: float) -> float:
    """|int_{-1}^{1} (S(z0 + h u) - S(z0)) du| / h^beta by Simpson quadrature."""
    _validate_beta(beta)
    if h <= 0:
        raise ValueError("h must be positive")
    if z0 - h < -1e-15 or z0 + h > 1.0 + 1e-15:
        raise ValueError(f"window [z0-h, z0+h] leaves [0, 1] for h={h}")
    s0 = float(np.asarray(S.eval(z0), dtype=float))
    integral = composite_simpson(
        lambda u: np.asarray(S.eval(z0 + h * u), dtype=float) - s0,
        -1.0, 1.0, DEFECT_QUAD_PANELS)
    return abs(integral) / h ** beta


def check_weak_holder(S: FunctionSpec, p: WeakHolderParams,
                      resolution: int = DEFAULT_SUP_RESOLUTION) -> WeakHolderReport:
    """Certificate for the local weak class at (z0, delta, beta).

    True iff the grid supremum of |S'| stays below 1/delta and the window
    defect stays below delta on every probe bandwidth.
    """
    x = np.linspace(0.0, 1.0, resolution)
    d = np.asarray(S.deriv(x), dtype=float)
    if d.shape != x.shape:
        d = np.broadcast_to(d, x.shape).astype(float)
    sup_deriv = float(np.max(np.abs(d)))
    deriv_bound = 1.0 / p.delta

    max_defect = -1.0
    worst_h = float(p.h_grid[0])
    for h in p.h_grid:
        defect = weak_defect(S, p.z0, p.beta, float(h))
        if defect > max_defect:
            max_defect = defect
            worst_h = float(h)
    certified = sup_deriv <= deriv_bound and max_defect <= p.delta
    return WeakHolderReport(
        certified=certified,
        sup_deriv=sup_deriv,
        deriv_bound=deriv_bound,
        max_defect=max_defect,
        defect_bound=p.delta,
        worst_h=worst_h,
        resolution=resolution,
    )
