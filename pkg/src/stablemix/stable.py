"""Positive alpha-stable laws and the exponential-stable family.

A standard positive alpha-stable variable S, alpha in (0, 1], is defined by
its Laplace transform E exp(-t S) = exp(-t^alpha).  For alpha = 1 the law is
degenerate at 1.  The exponential-stable law ExpS(alpha, mu, sigma) is the
law of mu + sigma * log(S); it is the random location shift underlying the
Gumbel mixture models in this package.

Density and distribution function of S are evaluated by adaptive quadrature
of a single-integral representation over (0, pi) (the same kernel that drives
the Kanter sampler), carried in log space so that the extreme tails do not
underflow prematurely.

Parameterization notes (documentation only, not implemented here): in the
Samorodnitsky-Taqqu notation S is S_alpha((cos(pi*alpha/2))^(1/alpha), 1, 0);
in Zolotarev's S_C notation it is S_C(alpha, 1, 1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateLawError, ParameterError, SupportError

EULER_GAMMA = float(np.euler_gamma)

# x outside this range raises instead of silently returning 0/1
_X_MIN = 1e-300
_X_MAX = 1e300

_QUAD_ABS_TOL = 1e-10


def _check_alpha(alpha: float) -> float:
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"stable index alpha must be in (0, 1], got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class StableLaw:
    """Standard positive alpha-stable law, Laplace transform exp(-t^alpha)."""

    alpha: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)

    @property
    def is_degenerate(self) -> bool:
        return self.alpha == 1.0


@dataclass(frozen=True)
class ExpSParams:
    """Exponential-stable law of mu + sigma*log(S), S ~ StableLaw(alpha)."""

    alpha: float
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")

    @property
    def is_degenerate(self) -> bool:
        return self.alpha == 1.0


def _log_kernel(u: np.ndarray, alpha: float) -> np.ndarray:
    """log a(u) for the Kanter kernel a on (0, pi).

    a(u) = sin((1-a)u) * sin(a*u)^(a/(1-a)) / sin(u)^(1/(1-a)), increasing
    from a(0+) = (1-a) * a^(a/(1-a)) to +inf at u = pi.
    """
    r = alpha / (1.0 - alpha)
    with np.errstate(divide="ignore"):
        return (
            np.log(np.sin((1.0 - alpha) * u))
            + r * np.log(np.sin(alpha * u))
            - (1.0 + r) * np.log(np.sin(u))
        )


def sample_stable_rng(law: StableLaw, shape, rng: np.random.Generator) -> np.ndarray:
    """Kanter draws from an existing generator (for composite simulations)."""
    if law.is_degenerate:
        return np.ones(shape)
    alpha = law.alpha
    u = rng.uniform(0.0, np.pi, size=shape)
    w = rng.standard_exponential(size=shape)
    log_s = ((1.0 - alpha) / alpha) * (_log_kernel(u, alpha) - np.log(w))
    return np.exp(log_s)


def sample_stable(law: StableLaw, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. standard positive stable variables (Kanter construction).

    Deterministic given the seed.  For alpha = 1 returns all ones.
    """
    if n < 0:
        raise ParameterError(f"sample size must be nonnegative, got {n}")
    return sample_stable_rng(law, n, np.random.default_rng(seed))


def _check_x(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise SupportError(f"positive stable support is (0, inf), got x={x}")
    if not (_X_MIN <= x <= _X_MAX):
        raise SupportError(f"x={x} outside the supported range [1e-300, 1e300]")
    return x


def _kernel_quad(alpha: float, log_y: float, with_kernel: bool) -> float:
    """log of (1/pi) * int_0^pi a(u)^k exp(-a(u) y) du, k = 1 or 0.

    y = x^(-alpha/(1-alpha)) enters through log_y; the integrand maximum is
    located first so that quadrature never misses the spike.
    """
    def log_g(u: float) -> float:
        la = _log_kernel(np.asarray(u), alpha)
        with np.errstate(over="ignore"):
            val = -np.exp(la + log_y)
        if with_kernel:
            val += la
        return float(val)

    # For large x the integrand concentrates in a layer of width ~ y^(1-alpha)
    # at u -> pi, where a(u) blows up.  The upper half is therefore integrated
    # in the stretched variable v = log(pi - u), which gives the layer O(1)
    # width; the lower half (including the u -> 0 layer for small x) stays in
    # the original variable.
    def log_g_v(v: float) -> float:
        # u = pi - s with s = e^v; sin(u) = sin(s) evaluated directly so the
        # kernel stays accurate when s is far below float resolution of pi
        s = np.exp(v)
        r_ = alpha / (1.0 - alpha)
        la = (
            np.log(np.sin((1.0 - alpha) * (np.pi - s)))
            + r_ * np.log(np.sin(alpha * (np.pi - s)))
            - (1.0 + r_) * np.log(np.sin(s))
        )
        with np.errstate(over="ignore"):
            val = -np.exp(la + log_y)
        if with_kernel:
            val += la
        return float(val + v)

    r = alpha / (1.0 - alpha)
    # near u = pi: log a(u) ~ c_pi - v/(1-alpha)
    c_pi = np.log(np.sin((1.0 - alpha) * np.pi)) + r * np.log(np.sin(alpha * np.pi))
    la_need = max(-log_y, 0.0) + 60.0
    v_hi = np.log(np.pi / 2.0)
    v_lo = max((1.0 - alpha) * (c_pi - la_need) - 5.0, -700.0)
    v_lo = min(v_lo, v_hi - 1.0)

    eps = 1e-12
    res_u = minimize_scalar(
        lambda u: -log_g(u), bounds=(eps, np.pi / 2.0), method="bounded",
        options={"xatol": 1e-10},
    )
    res_v = minimize_scalar(
        lambda v: -log_g_v(v), bounds=(v_lo, v_hi), method="bounded",
        options={"xatol": 1e-8},
    )
    u_star = float(res_u.x)
    v_star = float(res_v.x)
    m = max(log_g(u_star), log_g(eps), log_g_v(v_star))
    if not np.isfinite(m):
        return -np.inf
    if m < -1e15:
        # so deep in a tail that the O(1) width correction is lost to
        # rounding; the Laplace height alone is the answer to full precision
        return m

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        lower, _ = quad(
            lambda u: float(np.exp(log_g(u) - m)), 0.0, np.pi / 2.0,
            points=[u_star], limit=200, epsabs=_QUAD_ABS_TOL, epsrel=1e-12,
        )
        upper, _ = quad(
            lambda v: float(np.exp(log_g_v(v) - m)), v_lo, v_hi,
            points=[v_star], limit=200, epsabs=_QUAD_ABS_TOL, epsrel=1e-12,
        )
    total = lower + upper
    if total <= 0.0:
        return -np.inf
    return m + np.log(total) - np.log(np.pi)


def stable_logpdf(law: StableLaw, x: float) -> float:
    if law.is_degenerate:
        raise DegenerateLawError("pdf undefined for the degenerate law alpha=1")
    x = _check_x(x)
    alpha = law.alpha
    r = alpha / (1.0 - alpha)
    log_y = -r * np.log(x)
    log_integral = _kernel_quad(alpha, log_y, with_kernel=True)
    return float(np.log(r) - (1.0 + r) * np.log(x) + log_integral)


def stable_pdf(law: StableLaw, x: float) -> float:
    """Density of the standard positive stable law at x > 0."""
    return float(np.exp(stable_logpdf(law, x)))


def stable_cdf(law: StableLaw, x: float) -> float:
    """Distribution function of the standard positive stable law.

    For alpha = 1 this is the unit step at 1.
    """
    if law.is_degenerate:
        x = _check_x(x)
        return 1.0 if x >= 1.0 else 0.0
    x = _check_x(x)
    alpha = law.alpha
    log_y = -(alpha / (1.0 - alpha)) * np.log(x)
    return float(np.exp(_kernel_quad(alpha, log_y, with_kernel=False)))


def stable_tail_constant(alpha: float) -> float:
    """c_alpha in the Pareto tail P(S > x) ~ c_alpha * x^(-alpha)."""
    _check_alpha(alpha)
    from scipy.special import gamma

    return float(gamma(alpha) * np.sin(np.pi * alpha) / np.pi)


def stable_quantile(law: StableLaw, q: float) -> float:
    """Quantile of the standard positive stable law (CDF inverse)."""
    if not (0.0 < q < 1.0):
        raise ParameterError(f"quantile level must be in (0, 1), got {q}")
    if law.is_degenerate:
        return 1.0
    alpha = law.alpha
    # bracket from the Pareto upper tail and a generous lower start
    c = stable_tail_constant(alpha)
    hi = max(2.0, (c / (1.0 - q)) ** (1.0 / alpha) * 2.0)
    lo = 1e-6
    while stable_cdf(law, lo) > q and lo > _X_MIN * 10:
        lo /= 1e3
    while stable_cdf(law, hi) < q and hi < _X_MAX / 10:
        hi *= 10.0
    x = brentq(lambda t: stable_cdf(law, t) - q, lo, hi, xtol=1e-13, rtol=1e-13)
    return float(x)


# ---------------------------------------------------------------------------
# exponential-stable law of M = mu + sigma * log S


def exps_logpdf(p: ExpSParams, x: float) -> float:
    if p.is_degenerate:
        raise DegenerateLawError("pdf undefined for the degenerate law alpha=1")
    z = (float(x) - p.mu) / p.sigma
    law = StableLaw(p.alpha)
    # f_M(x) = e^z f_S(e^z)/sigma, computed in log space
    if z > np.log(_X_MAX) or z < np.log(_X_MIN):
        raise SupportError(f"x={x} maps outside the supported stable range")
    return float(z + stable_logpdf(law, np.exp(z)) - np.log(p.sigma))


def exps_pdf(p: ExpSParams, x: float) -> float:
    """Density of ExpS(alpha, mu, sigma) at x (support is all reals)."""
    return float(np.exp(exps_logpdf(p, x)))


def exps_cdf(p: ExpSParams, x: float) -> float:
    """Distribution function F_M(x) = F_S(exp((x - mu)/sigma))."""
    z = (float(x) - p.mu) / p.sigma
    if p.is_degenerate:
        return 1.0 if z >= 0.0 else 0.0
    if z > np.log(_X_MAX):
        return 1.0
    if z < np.log(_X_MIN):
        return 0.0
    return stable_cdf(StableLaw(p.alpha), float(np.exp(z)))


def exps_quantile(p: ExpSParams, q: float) -> float:
    """Quantile of ExpS; for alpha = 1 the law is a point mass at mu."""
    if not (0.0 < q < 1.0):
        raise ParameterError(f"quantile level must be in (0, 1), got {q}")
    if p.is_degenerate:
        return p.mu
    return p.mu + p.sigma * float(np.log(stable_quantile(StableLaw(p.alpha), q)))


def exps_moments(p: ExpSParams) -> tuple[float, float]:
    """Exact (mean, variance) of ExpS(alpha, mu, sigma)."""
    a = p.alpha
    mean = p.mu + p.sigma * EULER_GAMMA * (1.0 / a - 1.0)
    var = (np.pi**2) * (p.sigma**2) / 6.0 * (1.0 / a**2 - 1.0)
    return float(mean), float(var)


def sample_exps(p: ExpSParams, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. exponential-stable variables."""
    s = sample_stable(StableLaw(p.alpha), n, seed)
    return p.mu + p.sigma * np.log(s)
