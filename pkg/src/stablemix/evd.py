"""Univariate Gumbel and generalized extreme value distributions.

Closed-form evaluation and inverse-CDF sampling, plus the probability
weighted moment (PWM) estimator for the Gumbel family and Gumbel-plot
coordinates.  The shape gamma = 0 case is represented by GumbelParams,
never by a small-|gamma| GevParams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError
from .stable import EULER_GAMMA


@dataclass(frozen=True)
class GumbelParams:
    """Gumbel(mu, sigma): cdf exp(-exp(-(x - mu)/sigma))."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class GevParams:
    """GEV(mu, sigma, gamma): cdf exp(-(1 + gamma*(x - mu)/sigma)^(-1/gamma)).

    gamma > 0 gives a finite left endpoint, gamma < 0 a finite right
    endpoint, both at delta = mu - sigma/gamma.
    """

    mu: float
    sigma: float
    gamma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.gamma == 0:
            raise ParameterError("gamma = 0 is represented by GumbelParams")

    @property
    def endpoint(self) -> float:
        return self.mu - self.sigma / self.gamma


# ---------------------------------------------------------------------------
# Gumbel


def gumbel_logpdf(p: GumbelParams, x) -> np.ndarray | float:
    z = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    return -np.log(p.sigma) - z - np.exp(-z)


def gumbel_pdf(p: GumbelParams, x):
    return np.exp(gumbel_logpdf(p, x))


def gumbel_cdf(p: GumbelParams, x):
    z = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    return np.exp(-np.exp(-z))


def gumbel_quantile(p: GumbelParams, q):
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ParameterError("quantile levels must be in (0, 1)")
    return p.mu - p.sigma * np.log(-np.log(q))


def gumbel_sample(p: GumbelParams, n: int, seed: int) -> np.ndarray:
    if n < 0:
        raise ParameterError(f"sample size must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=n)
    return p.mu - p.sigma * np.log(-np.log(u))


# ---------------------------------------------------------------------------
# GEV


def _gev_t(p: GevParams, x) -> np.ndarray:
    """t(x) = (1 + gamma*(x - mu)/sigma)^(-1/gamma), clamped outside support.

    Below a finite left endpoint t = +inf (cdf 0); above a finite right
    endpoint t = 0 (cdf 1).
    """
    x = np.asarray(x, dtype=float)
    arg = 1.0 + p.gamma * (x - p.mu) / p.sigma
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        t = np.where(arg > 0, np.power(np.maximum(arg, 1e-320), -1.0 / p.gamma), np.nan)
    # outside support: argument <= 0
    outside = arg <= 0
    t = np.where(outside, np.inf if p.gamma > 0 else 0.0, t)
    return t


def gev_cdf(p: GevParams, x):
    t = _gev_t(p, x)
    with np.errstate(over="ignore"):
        return np.exp(-t)


def gev_pdf(p: GevParams, x):
    x = np.asarray(x, dtype=float)
    arg = 1.0 + p.gamma * (x - p.mu) / p.sigma
    t = _gev_t(p, x)
    with np.errstate(over="ignore", invalid="ignore"):
        pdf = np.where(arg > 0, np.exp(-t) * t ** (1.0 + p.gamma) / p.sigma, 0.0)
    return pdf


def gev_quantile(p: GevParams, q):
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ParameterError("quantile levels must be in (0, 1)")
    return p.mu + p.sigma * ((-np.log(q)) ** (-p.gamma) - 1.0) / p.gamma


def gev_sample(p: GevParams, n: int, seed: int) -> np.ndarray:
    if n < 0:
        raise ParameterError(f"sample size must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=n)
    return p.mu + p.sigma * ((-np.log(u)) ** (-p.gamma) - 1.0) / p.gamma


# ---------------------------------------------------------------------------
# PWM fitting and plot coordinates


def pwm_fit_gumbel(data) -> GumbelParams:
    """Probability-weighted-moment estimate of Gumbel parameters.

    Uses the unbiased b1 form with weights (i-1)/(n-1) over the ascending
    order statistics, which makes the estimator exactly location-scale
    equivariant.
    """
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n < 2:
        raise DataError(f"need at least 2 observations, got {n}")
    b0 = x.mean()
    w = np.arange(n) / (n - 1.0)
    b1 = np.mean(w * x)
    sigma = (2.0 * b1 - b0) / np.log(2.0)
    if not sigma > 0:
        raise DataError("degenerate sample: PWM scale estimate is not positive")
    mu = b0 - EULER_GAMMA * sigma
    return GumbelParams(mu=float(mu), sigma=float(sigma))


def gumbel_plot_coords(data) -> np.ndarray:
    """(x_(i), -log(-log(p_i))) pairs with midpoint positions p_i = (i-.5)/n.

    Returns an (n, 2) array sorted by x; a straight line of unit slope
    against Gumbel(0, 1) quantiles indicates a good Gumbel fit.
    """
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n < 1:
        raise DataError("need at least one observation")
    p = (np.arange(1, n + 1) - 0.5) / n
    return np.column_stack([x, -np.log(-np.log(p))])
