"""Least-favorable perturbations and the Bayes-risk lower bound.

Construction chain: a normalized smooth bump l supported on (-1, 1) is
convolved (at width nu) against the two-level step profile

    Qtilde_nu = 1 on |u| <= 1-2nu,  2 on 1-2nu <= |u| <= 1-nu,  0 beyond,

giving a plateau kernel V_nu with V_nu(0) = 1, integral 2 and support in
[-1, 1].  Rescaled to the estimation window and shrunk by the rate, the
perturbations S(x) = (u/phi_n) V_nu((x - z0)/h) stay inside the weak local
class once n passes an explicit threshold, carry a Gaussian likelihood
ratio with computable shift statistics, and drive the closed-form Bayes
bound whose (b -> inf, nu -> 0) limit is 1/sqrt(pi).

The convolution is evaluated exactly from the bump's cumulative integral:
V_nu(x) is a signed combination of CDF values at piecewise-affine
arguments, so accuracy is uniform in nu (no direct grid interpolation of
the sharp plateau profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .model import FunctionSpec, ScaleSpec, constant_fn, scale_eval, scale_profile
from .numerics import composite_simpson

DEFAULT_RESOLUTION = 4096
V_QUAD_PANELS = 32768


def _raw_bump(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = np.exp(-1.0 / (1.0 - zi * zi))
    return out


def _raw_bump_deriv(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    denom = 1.0 - zi * zi
    out[inside] = np.exp(-1.0 / denom) * (-2.0 * zi / denom ** 2)
    return out


@lru_cache(maxsize=8)
def _bump_tables(resolution: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Cumulative integral of the raw bump on ``resolution`` segments.

    Returns (nodes, normalized cdf, normalizer, sup|l'|).  Each segment is
    integrated by one Simpson panel; the bump is smooth, so the table is
    accurate to well below 1e-12 at the default resolution.
    """
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    nodes = np.linspace(-1.0, 1.0, resolution + 1)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    fa = _raw_bump(nodes[:-1])
    fm = _raw_bump(mids)
    fb = _raw_bump(nodes[1:])
    seg = (nodes[1:] - nodes[:-1]) / 6.0 * (fa + 4.0 * fm + fb)
    cdf = np.concatenate(([0.0], np.cumsum(seg)))
    normalizer = float(cdf[-1])
    cdf = cdf / normalizer
    cdf[-1] = 1.0

    # sup |l'| by dense scan plus bounded local refinement
    zs = np.linspace(-1.0, 1.0, 8193)
    vals = np.abs(_raw_bump_deriv(zs))
    k = int(np.argmax(vals))
    lo = zs[max(k - 1, 0)]
    hi = zs[min(k + 1, zs.size - 1)]
    res = minimize_scalar(lambda z: -abs(float(_raw_bump_deriv(np.asarray([z]))[0])),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    sup = max(float(vals[k]), -float(res.fun)) / normalizer
    return nodes, cdf, normalizer, sup


@dataclass(frozen=True)
class MollifierSpec:
    """Normalized smooth bump l(z) = exp(-1/(1-z^2)) / normalizer on (-1, 1).

    Carries the mollification width nu used by the plateau kernel, the
    cached cumulative integral of l, and sup|l'| (needed by the class
    membership threshold).
    """

    nu: float
    resolution: int
    normalizer: float = field(init=False)
    l_prime_sup: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.nu < 0.25):
            raise ValueError(f"nu must lie in (0, 1/4), got {self.nu}")
        _, _, normalizer, sup = _bump_tables(self.resolution)
        object.__setattr__(self, "normalizer", normalizer)
        object.__setattr__(self, "l_prime_sup", sup)

    def l(self, z: np.ndarray) -> np.ndarray:
        """The normalized bump."""
        return _raw_bump(z) / self.normalizer

    def l_cdf(self, z: np.ndarray) -> np.ndarray:
        """int_{-1}^{z} l, exactly 0 below -1 and 1 above +1."""
        nodes, cdf, _, _ = _bump_tables(self.resolution)
        return np.interp(np.asarray(z, dtype=float), nodes, cdf, left=0.0, right=1.0)


@dataclass(frozen=True)
class PlateauKernel:
    """Mollified two-level profile V_nu; evaluable anywhere on the line."""

    nu: float
    spec: MollifierSpec
    sq_integral: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sq_integral", self._compute_sq_integral())

    @property
    def _pieces(self) -> tuple[tuple[float, float, float], ...]:
        nu = self.nu
        return (
            (1.0, -(1.0 - 2.0 * nu), 1.0 - 2.0 * nu),
            (2.0, 1.0 - 2.0 * nu, 1.0 - nu),
            (2.0, -(1.0 - nu), -(1.0 - 2.0 * nu)),
        )

    def values(self, x: np.ndarray) -> np.ndarray:
        """V_nu(x) = (1/nu) int Qtilde_nu(u) l((u - x)/nu) du."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, a, b in self._pieces:
            out = out + w * (self.spec.l_cdf((b - x) / self.nu)
                             - self.spec.l_cdf((a - x) / self.nu))
        return out

    def deriv(self, x: np.ndarray) -> np.ndarray:
        """Exact derivative of V_nu from the bump itself."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, a, b in self._pieces:
            out = out + (w / self.nu) * (self.spec.l((a - x) / self.nu)
                                         - self.spec.l((b - x) / self.nu))
        return out

    def _compute_sq_integral(self) -> float:
        return composite_simpson(lambda z: self.values(z) ** 2,
                                 -1.0, 1.0, V_QUAD_PANELS)


def build_kernel(nu: float, resolution: int = DEFAULT_RESOLUTION) -> PlateauKernel:
    """Construct the plateau kernel for a mollification width nu in (0, 1/4)."""
    spec = MollifierSpec(nu=nu, resolution=resolution)
    return PlateauKernel(nu=nu, spec=spec)


@dataclass(frozen=True)
class PerturbationSpec:
    """Window-localized perturbation S(x) = (u/phi_n) V_nu((x - z0)/h)."""

    kernel: PlateauKernel
    u: float
    n: int
    beta: float
    z0: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (1.0 < self.beta <= 2.0):
            raise ValueError(f"beta must lie in (1, 2], got {self.beta}")
        if not (0.0 < self.z0 < 1.0):
            raise ValueError("z0 must lie in (0, 1)")

    @property
    def h(self) -> float:
        return float(self.n) ** (-1.0 / (2.0 * self.beta + 1.0))

    @property
    def phi_n(self) -> float:
        return float(self.n) ** (self.beta / (2.0 * self.beta + 1.0))

    @property
    def amplitude(self) -> float:
        """Peak value u/phi_n at z0."""
        return self.u / self.phi_n

    def to_function(self, label: str | None = None) -> FunctionSpec:
        amp = self.amplitude
        h, z0, kern = self.h, self.z0, self.kernel
        return FunctionSpec(
            label=label or f"bump(nu={kern.nu:g},u={self.u:g},n={self.n})",
            eval=lambda x: amp * kern.values((np.asarray(x, dtype=float) - z0) / h),
            deriv=lambda x: (amp / h) * kern.deriv((np.asarray(x, dtype=float) - z0) / h),
        )


def min_n_membership(nu: float, delta: float, beta: float, l_prime_sup: float) -> int:
    """Smallest n guaranteeing the unit-amplitude perturbation satisfies the
    weak-class derivative bound: ceil((2 sup|l'| delta / nu^2)^((2b+1)/(b-1))).

    For perturbations capped at amplitude b, fold the cap into the slope by
    passing b * l_prime_sup.
    """
    if beta <= 1.0:
        raise ValueError("beta must exceed 1 (threshold exponent diverges at 1)")
    if beta > 2.0:
        raise ValueError(f"beta must lie in (1, 2], got {beta}")
    if not (0.0 < nu < 0.25):
        raise ValueError(f"nu must lie in (0, 1/4), got {nu}")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    ratio = 2.0 * l_prime_sup * delta / nu ** 2
    if ratio <= 1.0:
        return 1
    return int(math.ceil(ratio ** ((2.0 * beta + 1.0) / (beta - 1.0))))


def _window_terms(pert: PerturbationSpec, scale: ScaleSpec
                  ) -> tuple[np.ndarray, np.ndarray, slice]:
    """(V values, g values, window slice) on the design points that matter."""
    from .estimator import EstimatorConfig

    cfg = EstimatorConfig(n=pert.n, beta=pert.beta, z0=pert.z0)
    xw = cfg.window_x
    vvals = pert.kernel.values((xw - pert.z0) / pert.h)
    g_w = scale_profile(scale, xw, pert.to_function())
    return vvals, g_w, cfg.window_slice


def varsigma_sq(pert: PerturbationSpec, scale: ScaleSpec) -> tuple[float, float]:
    """Shift variance of the likelihood ratio and its large-n limit.

    Returns (varsigma_n^2, sigma_nu^2) with
    varsigma_n^2 = (1/phi_n^2) sum_k V_nu^2((x_k-z0)/h) / g^2(x_k, S) and
    sigma_nu^2 = int_{-1}^{1} V_nu^2 / g^2(z0, 0).
    """
    vvals, g_w, _ = _window_terms(pert, scale)
    vs = float(np.sum((vvals / g_w) ** 2)) / pert.phi_n ** 2
    g0 = scale_eval(scale, pert.z0, constant_fn(0.0))
    return vs, pert.kernel.sq_integral / g0 ** 2


def shift_statistic(pert: PerturbationSpec, scale: ScaleSpec,
                    y: np.ndarray) -> tuple[float, float]:
    """(eta_n, varsigma_n) for an observation vector of length n.

    eta_n = (1/(varsigma_n phi_n)) sum_k V_nu((x_k-z0)/h) y_k / g^2(x_k, S);
    under the pure-noise law it is standard Gaussian.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (pert.n,):
        raise ValueError(f"expected {pert.n} observations, got shape {y.shape}")
    vvals, g_w, win = _window_terms(pert, scale)
    vs = float(np.sum((vvals / g_w) ** 2)) / pert.phi_n ** 2
    varsigma = math.sqrt(vs)
    eta = float(np.sum(vvals * y[win] / g_w ** 2)) / (varsigma * pert.phi_n)
    return eta, varsigma


def likelihood_ratio(u: float, pert: PerturbationSpec, scale: ScaleSpec,
                     y: np.ndarray) -> float:
    """Gaussian likelihood ratio exp(u varsigma eta - u^2 varsigma^2 / 2)
    between the perturbed-mean and pure-noise laws, at amplitude u."""
    at_u = replace(pert, u=float(u))
    eta, varsigma = shift_statistic(at_u, scale, y)
    return math.exp(u * varsigma * eta - 0.5 * u * u * varsigma * varsigma)


def bayes_bound(nu: float, b: float, g_z0: float,
                kernel: PlateauKernel | None = None,
                resolution: int = DEFAULT_RESOLUTION) -> float:
    """Closed-form Bayes-risk lower bound at mollification nu and prior cap b.

    Value: (sigma_nu / sqrt(2 pi)) * ((b - sqrt(b))/b)
           * int_{-sqrt(b)}^{sqrt(b)} (|t|/g_z0) exp(-sigma_nu^2 t^2 / 2) dt,
    with sigma_nu^2 = int V_nu^2 / g_z0^2.  Increases in b and tends to
    1/sqrt(pi) as b -> inf, nu -> 0.
    """
    if b <= 1.0:
        raise ValueError("b must exceed 1")
    if g_z0 <= 0.0:
        raise ValueError("g_z0 must be positive")
    if kernel is None:
        kernel = build_kernel(nu, resolution)
    elif abs(kernel.nu - nu) > 1e-12:
        raise ValueError("provided kernel was built for a different nu")
    sigma_sq = kernel.sq_integral / g_z0 ** 2
    sigma = math.sqrt(sigma_sq)
    root_b = math.sqrt(b)
    integral = 2.0 / g_z0 * composite_simpson(
        lambda t: t * np.exp(-0.5 * sigma_sq * t * t),
        0.0, root_b, 4096)
    return sigma / math.sqrt(2.0 * math.pi) * ((b - root_b) / b) * integral
