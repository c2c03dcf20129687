"""Maximum-likelihood fitting, standard errors, and likelihood-ratio tests.

Optimization is derivative-free (Nelder-Mead) on an unconstrained scale:
mu free, sigma = exp(s), alpha mapped into [ALPHA_LO, ALPHA_HI] by a scaled
logistic, b = exp(beta).  Standard errors come from the inverse of the
empirical (observed) information, computed by central differences on the
unconstrained scale and mapped back through the transform Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.special import expit, logit
from scipy.stats import chi2

from .data import GroupedSample, SeriesSample
from .errors import ConvergenceError, DataError, IdentifiabilityError, ParameterError
from .evd import gumbel_logpdf, GumbelParams, pwm_fit_gumbel
from .likelihood import ma1_loglik_multi, re_total_loglik

ALPHA_LO = 0.02
ALPHA_HI = 0.995
_BOUNDARY_MARGIN = 0.005

_NM_OPTIONS = {"maxfev": 2000, "fatol": 1e-8, "xatol": 1e-8}


@dataclass
class FitResult:
    """Estimates, uncertainty, and bookkeeping from one model fit."""

    param_names: list[str]
    theta: np.ndarray
    loglik: float
    std_errors: np.ndarray | None = None
    covariance: np.ndarray | None = None
    converged: bool = False
    n_starts_used: int = 1
    best_start: int = 0
    warnings: list[str] = field(default_factory=list)
    derived: dict = field(default_factory=dict)

    @property
    def estimates(self) -> dict:
        return dict(zip(self.param_names, (float(v) for v in self.theta)))

    def se(self, name: str) -> float:
        if self.std_errors is None:
            raise ConvergenceError("standard errors unavailable for this fit")
        return float(self.std_errors[self.param_names.index(name)])


# ---------------------------------------------------------------------------
# parameter transforms


def alpha_to_unconstrained(alpha: float) -> float:
    return float(logit((alpha - ALPHA_LO) / (ALPHA_HI - ALPHA_LO)))


def alpha_from_unconstrained(a: float) -> float:
    return float(ALPHA_LO + (ALPHA_HI - ALPHA_LO) * expit(a))


class _Transform:
    """Bijection between the natural and unconstrained parameter vectors.

    kinds: 'free' (identity), 'pos' (log), 'alpha' (scaled logistic).
    """

    def __init__(self, kinds: list[str]):
        self.kinds = kinds

    def to_unconstrained(self, theta: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.kinds))
        for i, kind in enumerate(self.kinds):
            v = float(theta[i])
            if kind == "free":
                out[i] = v
            elif kind == "pos":
                out[i] = np.log(max(v, 1e-12))
            else:
                out[i] = alpha_to_unconstrained(v)
        return out

    def to_natural(self, u: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.kinds))
        for i, kind in enumerate(self.kinds):
            v = float(u[i])
            if kind == "free":
                out[i] = v
            elif kind == "pos":
                out[i] = np.exp(v)
            else:
                out[i] = alpha_from_unconstrained(v)
        return out

    def jacobian_diag(self, u: np.ndarray) -> np.ndarray:
        """d theta_natural / d u, diagonal because coordinates do not mix."""
        out = np.empty(len(self.kinds))
        for i, kind in enumerate(self.kinds):
            v = float(u[i])
            if kind == "free":
                out[i] = 1.0
            elif kind == "pos":
                out[i] = np.exp(v)
            else:
                e = expit(v)
                out[i] = (ALPHA_HI - ALPHA_LO) * e * (1.0 - e)
        return out


def _central_hessian(fn, u: np.ndarray, step: float = 1e-4) -> np.ndarray:
    k = u.size
    h = step * np.maximum(1.0, np.abs(u))
    hess = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h[i]
            ej[j] = h[j]
            if i == j:
                val = (fn(u + ei) - 2.0 * fn(u) + fn(u - ei)) / h[i] ** 2
            else:
                val = (
                    fn(u + ei + ej) - fn(u + ei - ej) - fn(u - ei + ej) + fn(u - ei - ej)
                ) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def observed_information(loglik_fn, theta_hat: np.ndarray,
                         transform: _Transform | None = None) -> np.ndarray | None:
    """Covariance estimate from the inverse empirical information matrix.

    loglik_fn takes the natural parameter vector.  The Hessian is taken on
    the unconstrained scale (identity transform by default) and mapped to
    the natural scale.  Returns None when the information matrix is not
    invertible at a meaningful level.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    if transform is None:
        transform = _Transform(["free"] * theta_hat.size)
    u_hat = transform.to_unconstrained(theta_hat)

    def fn(u):
        return loglik_fn(transform.to_natural(u))

    info = -_central_hessian(fn, u_hat)
    info = 0.5 * (info + info.T)
    vals, vecs = np.linalg.eigh(info)
    floor = 1e-12 * max(np.trace(info), 1.0)
    if np.any(vals <= floor):
        return None
    cov_u = (vecs / vals) @ vecs.T
    jac = transform.jacobian_diag(u_hat)
    return (cov_u * jac).T * jac  # J @ cov_u @ J for diagonal J


def delta_method_interval(g, fit: FitResult, level: float = 0.95) -> tuple[float, float]:
    """Wald interval for a smooth scalar function of the fitted parameters."""
    if fit.covariance is None:
        raise ConvergenceError("fit has no covariance; interval unavailable")
    from scipy.stats import norm

    theta = fit.theta
    k = theta.size
    grad = np.empty(k)
    h = 1e-5 * np.maximum(1.0, np.abs(theta))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h[i]
        grad[i] = (g(theta + e) - g(theta - e)) / (2.0 * h[i])
    var = float(grad @ fit.covariance @ grad)
    z = norm.ppf(0.5 + level / 2.0)
    center = float(g(theta))
    half = z * np.sqrt(max(var, 0.0))
    return center - half, center + half


def likelihood_ratio_test(loglik_full: float, loglik_reduced: float,
                          df: int) -> tuple[float, float]:
    """LRT statistic 2*(l_full - l_reduced) and its chi-square p-value."""
    if df < 1:
        raise ParameterError("degrees of freedom must be >= 1")
    stat = 2.0 * (loglik_full - loglik_reduced)
    if stat < -1e-6:
        raise ConvergenceError(
            f"negative LRT statistic {stat}: reduced model out-optimized the full one"
        )
    stat = max(stat, 0.0)
    return float(stat), float(chi2.sf(stat, df))


# ---------------------------------------------------------------------------
# model fits


def _run_nelder_mead(neg_loglik, u0: np.ndarray):
    # scale the evaluation budget with dimension; the simplex needs far more
    # moves in, say, 13 parameters than in 3
    opts = dict(_NM_OPTIONS, maxfev=max(_NM_OPTIONS["maxfev"], 400 * u0.size))
    res = minimize(neg_loglik, u0, method="Nelder-Mead", options=opts)
    # one polishing restart from the incumbent
    res2 = minimize(neg_loglik, res.x, method="Nelder-Mead", options=opts)
    return res2 if res2.fun <= res.fun else res


def fit_random_effects(data: GroupedSample, compute_se: bool = True) -> FitResult:
    """Fit (mu, sigma, alpha) of the one-way random effects model by ML.

    Initialization: pooled PWM Gumbel estimates (mu0, sigma0), start at
    (mu0, sigma0/2, alpha=0.5).
    """
    if data.n_groups < 2:
        raise IdentifiabilityError("a single group does not identify the parameters")
    if all(n == 1 for n in data.sizes):
        raise IdentifiabilityError("all groups of size one: alpha is not identifiable")
    pooled = data.pooled()
    init = pwm_fit_gumbel(pooled)
    transform = _Transform(["free", "pos", "alpha"])
    theta0 = np.array([init.mu, init.sigma / 2.0, 0.5])
    u0 = transform.to_unconstrained(theta0)

    def loglik_nat(theta):
        return re_total_loglik(theta[0], theta[1], theta[2], data.groups)

    def neg(u):
        mu, sigma, alpha = transform.to_natural(u)
        try:
            return -loglik_nat((mu, sigma, alpha))
        except (OverflowError, FloatingPointError):
            return np.inf

    res = _run_nelder_mead(neg, u0)
    theta = transform.to_natural(res.x)
    ll = -float(res.fun)
    if ll < -neg(u0) - 1e-9:
        raise ConvergenceError("optimizer ended below its starting log-likelihood")
    warnings_list = []
    if theta[2] > ALPHA_HI - _BOUNDARY_MARGIN or theta[2] < ALPHA_LO + _BOUNDARY_MARGIN:
        warnings_list.append(
            "alpha estimate at the constraint boundary; Wald inference unreliable"
        )
    fit = FitResult(
        param_names=["mu", "sigma", "alpha"],
        theta=theta,
        loglik=ll,
        converged=bool(res.success),
        warnings=warnings_list,
        derived={"sigma_star": float(theta[1] / theta[2])},
    )
    if compute_se:
        cov = observed_information(lambda t: loglik_nat(t), theta, transform)
        if cov is None:
            fit.warnings.append("information matrix not invertible; no covariance")
        else:
            fit.covariance = cov
            fit.std_errors = np.sqrt(np.diag(cov))
    return fit


def _ma1_total_loglik(mus: np.ndarray, b: float, sigma: float, alpha: float,
                      series: list[np.ndarray]) -> float:
    """Sum of per-series MA(1) log-densities; equal lengths are vectorized."""
    by_len: dict[int, list[int]] = {}
    for i, s in enumerate(series):
        by_len.setdefault(s.size, []).append(i)
    total = 0.0
    for n, idx in by_len.items():
        X = np.stack([series[i] for i in idx])
        M = np.repeat(mus[idx, None], n, axis=1)
        total += float(np.sum(ma1_loglik_multi(M, b, sigma, alpha, X)))
    return total


def fit_ma1(data: SeriesSample, n_starts: int = 20, seed: int = 0,
            start_sigma_factor: float = 0.5, compute_se: bool = True) -> FitResult:
    """Fit the hidden MA(1) model: per-series mu, common (b, sigma, alpha).

    Multi-start search: the default start is (mu0, b=0, sigma =
    start_sigma_factor * sigma0, alpha = 0.5) from pooled PWM estimates;
    the remaining starts draw (sigma, alpha, b) uniformly from
    [0.1*sigma0, sigma0] x [0.1, 0.99] x [0, 2].  The best final
    log-likelihood wins, ties broken by start order.
    """
    if any(s.size < 2 for s in data.series):
        raise IdentifiabilityError("every series needs length >= 2")
    if n_starts < 1:
        raise ParameterError("need at least one start")
    k = data.n_series
    init = pwm_fit_gumbel(data.pooled())
    mu0 = np.array([pwm_fit_gumbel(s).mu if s.size >= 2 else init.mu
                    for s in data.series])
    sigma0 = init.sigma
    transform = _Transform(["free"] * k + ["pos", "pos", "alpha"])

    def neg(u):
        nat = transform.to_natural(u)
        mus, b, sigma, alpha = nat[:k], nat[k], nat[k + 1], nat[k + 2]
        try:
            return -_ma1_total_loglik(mus, b, sigma, alpha, data.series)
        except (OverflowError, FloatingPointError):
            return np.inf

    rng = np.random.default_rng(seed)
    starts = [np.array([*mu0, 1e-6, start_sigma_factor * sigma0, 0.5])]
    for _ in range(n_starts - 1):
        sig = rng.uniform(0.1 * sigma0, sigma0)
        alp = rng.uniform(0.1, 0.99)
        b = rng.uniform(0.0, 2.0)
        starts.append(np.array([*mu0, max(b, 1e-6), sig, alp]))

    best = None
    best_idx = -1
    any_converged = False
    for idx, theta_start in enumerate(starts):
        u0 = transform.to_unconstrained(theta_start)
        res = _run_nelder_mead(neg, u0)
        if not np.isfinite(res.fun):
            continue
        any_converged = any_converged or bool(res.success)
        if best is None or res.fun < best.fun - 1e-12:
            best, best_idx = res, idx
    if best is None:
        raise ConvergenceError("all MA(1) starts failed to produce a finite likelihood")
    nat = transform.to_natural(best.x)
    names = [f"mu_{lab}" for lab in data.labels] + ["b", "sigma", "alpha"]
    theta = np.asarray(nat)
    warnings_list = []
    alpha_hat = theta[k + 2]
    if alpha_hat > ALPHA_HI - _BOUNDARY_MARGIN or alpha_hat < ALPHA_LO + _BOUNDARY_MARGIN:
        warnings_list.append(
            "alpha estimate at the constraint boundary; Wald inference unreliable"
        )
    fit = FitResult(
        param_names=names,
        theta=theta,
        loglik=-float(best.fun),
        converged=any_converged,
        n_starts_used=len(starts),
        best_start=best_idx,
        warnings=warnings_list,
    )
    # marginal Gumbel implied by the fit: location mu + (sigma/alpha)*log(1+b^alpha)
    b_hat, sigma_hat = theta[k], theta[k + 1]
    fit.derived = {
        "marginal_scale": float(sigma_hat / alpha_hat),
        "marginal_location_shift": float(
            (sigma_hat / alpha_hat) * np.log1p(b_hat**alpha_hat)
        ),
    }
    if compute_se:
        def loglik_nat(t):
            t = np.asarray(t, dtype=float)
            return _ma1_total_loglik(t[:k], t[k], t[k + 1], t[k + 2], data.series)

        cov = observed_information(loglik_nat, theta, transform)
        if cov is None:
            fit.warnings.append("information matrix not invertible; no covariance")
        else:
            fit.covariance = cov
            fit.std_errors = np.sqrt(np.diag(cov))
    return fit


# ---------------------------------------------------------------------------
# conditional (per-group) Gumbel models for model checking


def _gumbel_mle(x: np.ndarray) -> GumbelParams:
    """Two-parameter Gumbel MLE via the 1-d profile equation for sigma."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise DataError("group too small or constant for a per-group Gumbel fit")
    xbar = x.mean()

    def score(sigma):
        w = np.exp(-(x - x.min()) / sigma)
        return sigma - xbar + np.sum(x * w) / np.sum(w)

    lo, hi = 1e-8 * np.ptp(x), 10.0 * np.ptp(x)
    while score(hi) < 0:
        hi *= 2.0
    sigma = brentq(score, lo, hi, xtol=1e-12, rtol=1e-12)
    shift = x.min()
    mu = shift - sigma * np.log(np.mean(np.exp(-(x - shift) / sigma)))
    return GumbelParams(mu=float(mu), sigma=float(sigma))


def _common_sigma_mles(groups: list[np.ndarray]):
    """Per-group mu with a shared sigma, by 1-d profile likelihood."""
    pooled = np.concatenate(groups)

    def profile_negloglik(log_sigma):
        sigma = np.exp(log_sigma)
        total = 0.0
        for g in groups:
            shift = g.min()
            mu = shift - sigma * np.log(np.mean(np.exp(-(g - shift) / sigma)))
            total += float(np.sum(gumbel_logpdf(GumbelParams(mu, sigma), g)))
        return -total

    guess = np.log(pwm_fit_gumbel(pooled).sigma)
    res = minimize_scalar(profile_negloglik, bracket=(guess - 1.0, guess + 1.0))
    sigma = float(np.exp(res.x))
    mus = []
    for g in groups:
        shift = g.min()
        mus.append(float(shift - sigma * np.log(np.mean(np.exp(-(g - shift) / sigma)))))
    return mus, sigma, -float(res.fun)


def fit_conditional_gumbel_models(data: GroupedSample) -> tuple[FitResult, FitResult, FitResult]:
    """Three nested conditional Gumbel fits for model checking.

    Model 1: per-group (mu_i, sigma_i); model 2: per-group mu_i, common
    sigma; model 3: common (mu, sigma).  Returned in that order.
    """
    if data.n_groups < 2:
        raise IdentifiabilityError("need at least two groups")
    groups = data.groups
    # model 1
    names1, theta1 = [], []
    ll1 = 0.0
    for lab, g in zip(data.labels, groups):
        p = _gumbel_mle(g)
        names1 += [f"mu_{lab}", f"sigma_{lab}"]
        theta1 += [p.mu, p.sigma]
        ll1 += float(np.sum(gumbel_logpdf(p, g)))
    model1 = FitResult(param_names=names1, theta=np.array(theta1), loglik=ll1,
                       converged=True)
    # model 2
    mus, sigma, ll2 = _common_sigma_mles(groups)
    model2 = FitResult(
        param_names=[f"mu_{lab}" for lab in data.labels] + ["sigma"],
        theta=np.array(mus + [sigma]),
        loglik=ll2,
        converged=True,
    )
    # model 3
    p3 = _gumbel_mle(data.pooled())
    ll3 = float(np.sum(gumbel_logpdf(p3, data.pooled())))
    model3 = FitResult(param_names=["mu", "sigma"], theta=np.array([p3.mu, p3.sigma]),
                       loglik=ll3, converged=True)
    return model1, model2, model3
