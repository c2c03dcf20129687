"""Exact log-likelihoods via closed-form recursions.

Random-effects groups: the group density is, up to Jacobian factors, the
positive-variable moment E[S^n exp(-S*Delta)] = (-1)^n d^n/dDelta^n
exp(-Delta^alpha), which expands as

    D_n(Delta) = exp(-Delta^alpha) * sum_{j=1..n} a_{n,j} Delta^{j*alpha - n},

with a_{1,1} = alpha and a_{n+1,j} = (n - j*alpha) a_{n,j} + alpha a_{n,j-1}.
All coefficients are positive for alpha in (0, 1]; they grow fast with n and
small alpha, so they are stored as logs and combined with log-sum-exp.

Hidden MA(1) series: the density factorizes as Q_n * F * prod z_t/sigma with
Q_n given by a three-term recursion in the overlap variables
u_1 = b z_1, u_t = z_{t-1} + b z_t, u_{n+1} = z_n.  The recursion is carried
in log space with explicit sign tracking (its raw form has a negative
factor, although the products remain positive for alpha < 1).
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError, DegenerateLawError, ParameterError, SupportError
from .stable import _check_alpha

_LOG_TINY = -745.0  # log of the smallest positive double, used as "log 0"


class DerivativeTable:
    """Log-space coefficients a_{n,j} of the stable derivative expansion."""

    def __init__(self, alpha: float, max_order: int):
        _check_alpha(alpha)
        if max_order < 1:
            raise ParameterError("max_order must be >= 1")
        self.alpha = float(alpha)
        self.max_order = int(max_order)
        # rows[n] has entries j = 1..n as log a_{n,j}; -inf marks exact zeros
        rows: list[np.ndarray] = [np.array([np.log(alpha)])]
        with np.errstate(divide="ignore"):
            for n in range(1, max_order):
                prev = rows[-1]
                j = np.arange(1, n + 1)
                grow = np.log(np.maximum(n - j * alpha, 0.0)) + prev
                nxt = np.full(n + 1, -np.inf)
                nxt[: n] = grow
                nxt[1:] = np.logaddexp(nxt[1:], np.log(alpha) + prev)
                rows.append(nxt)
        self.log_rows = rows
        if not all(np.all(r < np.inf) for r in rows):
            raise CapacityError(
                f"coefficient overflow at order {max_order}, alpha={alpha}"
            )

    def log_coefficients(self, n: int) -> np.ndarray:
        """log a_{n,j} for j = 1..n."""
        if not (1 <= n <= self.max_order):
            raise ParameterError(f"order {n} outside table range 1..{self.max_order}")
        return self.log_rows[n - 1]


def log_stable_derivative(n: int, alpha: float, log_delta: float,
                          table: DerivativeTable | None = None) -> float:
    """log D_n(Delta) with Delta supplied in log form.

    D_n(Delta) = (-1)^n d^n/dDelta^n exp(-Delta^alpha); D_0 = exp(-Delta^alpha).
    """
    _check_alpha(alpha)
    if n < 0:
        raise ParameterError("derivative order must be nonnegative")
    delta_pow = np.exp(alpha * log_delta)
    if n == 0:
        return float(-delta_pow)
    if table is None:
        table = DerivativeTable(alpha, n)
    la = table.log_coefficients(n)
    j = np.arange(1, n + 1)
    val = -delta_pow + logsumexp(la + (j * alpha - n) * log_delta)
    if np.isnan(val):
        raise CapacityError(f"stable derivative lost precision at n={n}, alpha={alpha}")
    return float(val)


def stable_derivative(n: int, alpha: float, delta: float) -> float:
    """D_n(Delta) = E[S^n exp(-S*Delta)] > 0 for Delta > 0."""
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    return float(np.exp(log_stable_derivative(n, alpha, float(np.log(delta)))))


# ---------------------------------------------------------------------------
# random-effects likelihood


def re_group_loglik(mu: float, sigma: float, alpha: float, group,
                    table: DerivativeTable | None = None) -> float:
    """Exact log-density of one random-effects group at its observations."""
    _check_alpha(alpha)
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    x = np.asarray(group, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ParameterError("group must be a nonempty 1-d array")
    n = x.size
    w = (x - mu) / sigma
    log_delta = float(logsumexp(-w))
    log_d = log_stable_derivative(n, alpha, log_delta, table)
    return float(-n * np.log(sigma) - np.sum(w) + log_d)


def re_total_loglik(mu: float, sigma: float, alpha: float, groups) -> float:
    """Sum of independent group log-densities.

    ``groups`` is any iterable of 1-d arrays (e.g. GroupedSample.groups).
    """
    groups = [np.asarray(g, dtype=float) for g in groups]
    if not groups:
        raise ParameterError("no groups supplied")
    table = DerivativeTable(alpha, max(g.size for g in groups))
    return float(sum(re_group_loglik(mu, sigma, alpha, g, table) for g in groups))


def gev_re_group_loglik(mu: float, sigma: float, gamma: float, alpha: float,
                        group, table: DerivativeTable | None = None) -> float:
    """GEV variant of the group log-density; all points must lie strictly
    inside the support of the conditional GEV margin."""
    _check_alpha(alpha)
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    if gamma == 0:
        raise ParameterError("gamma = 0 is the Gumbel case; use re_group_loglik")
    x = np.asarray(group, dtype=float)
    n = x.size
    arg = 1.0 + gamma * (x - mu) / sigma
    if np.any(arg <= 0):
        raise SupportError("observation outside the GEV support")
    log_z = -np.log(arg) / gamma
    log_delta = float(logsumexp(log_z))
    log_d = log_stable_derivative(n, alpha, log_delta, table)
    return float(np.sum((1.0 + gamma) * log_z) - n * np.log(sigma) + log_d)


# ---------------------------------------------------------------------------
# hidden MA(1) likelihood


def _ma1_overlaps(z: np.ndarray, b: float) -> np.ndarray:
    """u_1 = b z_1, u_t = z_{t-1} + b z_t (2 <= t <= n), u_{n+1} = z_n."""
    n = z.size
    u = np.empty(n + 1)
    u[0] = b * z[0]
    u[1:n] = z[: n - 1] + b * z[1:]
    u[n] = z[n - 1]
    return u


def ma1_loglik(mu, b: float, sigma: float, alpha: float, series) -> float:
    """Exact log-density of one hidden-MA(1) series.

    ``mu`` may be a scalar or a per-time vector.  b = 0 gives the exact
    independent-Gumbel likelihood; alpha = 1 with b > 0 is degenerate and
    rejected.
    """
    _check_alpha(alpha)
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    if b < 0:
        raise ParameterError("b must be nonnegative")
    if alpha == 1.0 and b > 0:
        raise DegenerateLawError("hidden MA(1) with alpha = 1 is degenerate")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ParameterError("series must be a nonempty 1-d array")
    out = ma1_loglik_multi(np.broadcast_to(np.asarray(mu, dtype=float), x.shape)[None, :],
                           b, sigma, alpha, x[None, :])
    return float(out[0])


def ma1_loglik_multi(mus: np.ndarray, b: float, sigma: float, alpha: float,
                     X: np.ndarray) -> np.ndarray:
    """Vectorized MA(1) log-densities for k equal-length series (k, n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mus = np.broadcast_to(np.asarray(mus, dtype=float), X.shape)
    k, n = X.shape
    w = (X - mus) / sigma
    z = np.exp(-w)
    with np.errstate(divide="ignore"):
        log_b = np.log(b) if b > 0 else _LOG_TINY * 2.0
        log_alpha = np.log(alpha)
        lam = np.log1p(-alpha) if alpha < 1 else -np.inf  # log(1 - alpha)
    u = np.empty((k, n + 1))
    u[:, 0] = b * z[:, 0]
    if n > 1:
        u[:, 1:n] = z[:, : n - 1] + b * z[:, 1:]
    u[:, n] = z[:, n - 1]
    with np.errstate(divide="ignore"):
        log_u = np.log(u)
    # log-space Q recursion with sign tracking; both recursion weights are
    # nonnegative for alpha <= 1, so signs stay +1, but track them anyway
    log_q_prev = np.zeros(k)          # Q_0 = 1
    sign_prev = np.ones(k)
    if b > 0:
        log_q = log_alpha + np.logaddexp(log_b + (alpha - 1.0) * log_u[:, 0],
                                         (alpha - 1.0) * log_u[:, 1])
    else:
        log_q = log_alpha + (alpha - 1.0) * log_u[:, 1]
    sign = np.ones(k)
    for i in range(2, n + 1):
        # Q_i = alpha(1-alpha) b u_i^(a-2) Q_{i-2} + alpha(b u_i^(a-1) + u_{i+1}^(a-1)) Q_{i-1}
        t2 = log_alpha + lam + log_b + (alpha - 2.0) * log_u[:, i - 1] + log_q_prev
        c1 = np.logaddexp(log_b + (alpha - 1.0) * log_u[:, i - 1],
                          (alpha - 1.0) * log_u[:, i])
        t1 = log_alpha + c1 + log_q
        both_pos = sign_prev * sign
        mag = np.where(both_pos > 0, np.logaddexp(t1, t2),
                       np.maximum(t1, t2) + np.log1p(-np.exp(-np.abs(t1 - t2))))
        new_sign = np.where(both_pos > 0, sign, np.where(t1 >= t2, sign, sign_prev))
        log_q_prev, sign_prev = log_q, sign
        log_q, sign = mag, new_sign
    if np.any(sign <= 0):
        raise CapacityError("MA(1) recursion produced a nonpositive density")
    sum_u_alpha = np.where(u > 0, u**alpha, 0.0).sum(axis=1)
    out = log_q - sum_u_alpha - w.sum(axis=1) - n * np.log(sigma)
    if np.any(np.isnan(out)):
        raise CapacityError(f"MA(1) likelihood lost precision (alpha={alpha}, b={b})")
    return out
