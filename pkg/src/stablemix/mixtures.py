"""Finite stable-mixture models for dependent Gumbel/GEV maxima.

The central object is a MixtureSpec: a finite family {X_t} directed by
independent positive alpha-stable variables {S_a} through a nonnegative
coefficient matrix C = {c_{t,a}},

    X_t = G_t + sigma_t * log(sum_a c_{t,a} S_a),    G_t ~ Gumbel(mu_t, sigma_t),

whose joint distribution function has the closed product form

    P(X_t <= x_t, all t) = prod_a exp(-(sum_t c_{t,a} z_t)^alpha),
    z_t = exp(-(x_t - mu_t)/sigma_t).

Concrete families (one-way random effects, hidden MA(q), hidden AR(1),
spatial moving average on a lattice) are expressed as builders producing an
explicit MixtureSpec.  The two-layer hierarchical (nested) family falls
outside the single-index form and has its own evaluator and simulator.

The GEV variants replace z_t by (1 + gamma*(x_t - mu_t)/sigma_t)^(-1/gamma);
simulation uses the endpoint-preserving scale mixture
X = H^gamma * E + (1 - H^gamma) * delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .evd import GevParams, GumbelParams
from .stable import StableLaw, _check_alpha, sample_stable_rng


@dataclass(frozen=True)
class MixtureSpec:
    """Coefficient-matrix form of a finite stable-mixture model.

    C has one row per observed index t and one column per mixing variable a.
    """

    C: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        mu = np.broadcast_to(np.asarray(self.mu, dtype=float), (C.shape[0],)).copy()
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (C.shape[0],)).copy()
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        _check_alpha(self.alpha)
        if np.any(C < 0):
            raise ParameterError("mixture coefficients must be nonnegative")
        if np.any(C.max(axis=1) <= 0):
            raise ParameterError("every row of C needs at least one positive entry")
        if np.any(sigma <= 0):
            raise ParameterError("all scale parameters must be positive")

    @property
    def n_indices(self) -> int:
        return self.C.shape[0]

    @property
    def n_mixers(self) -> int:
        return self.C.shape[1]

    def common_sigma(self) -> float:
        """The shared scale, required by the max-distribution operations."""
        s = self.sigma
        if not np.all(s == s[0]):
            raise ParameterError("operation requires all scale parameters equal")
        return float(s[0])


# ---------------------------------------------------------------------------
# model family specs and builders


@dataclass(frozen=True)
class RandomEffectsSpec:
    """One-way random effects: common ExpS shift within each group."""

    mu: float
    sigma: float
    alpha: float
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if len(self.sizes) < 1 or any(n < 1 for n in self.sizes):
            raise ParameterError("need at least one group, all sizes >= 1")


@dataclass(frozen=True)
class HiddenMaSpec:
    """Gumbel series directed by a positive-stable moving average.

    Coefficients b[0..q]; for MA(1) fitting the canonical form is b = (1, b1).
    mu may be a scalar or a length-n vector of per-time locations.
    """

    n: int
    mu: float | tuple[float, ...]
    sigma: float
    alpha: float
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if self.n < 1:
            raise ParameterError("series length must be >= 1")
        if len(self.b) < 1 or any(c < 0 for c in self.b) or max(self.b) <= 0:
            raise ParameterError("MA coefficients must be nonnegative, not all zero")


@dataclass(frozen=True)
class HiddenArSpec:
    """Gumbel series directed by a stationary positive-stable AR(1)."""

    n: int
    mu: float | tuple[float, ...]
    sigma: float
    alpha: float
    rho: float

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not (0.0 < self.rho < 1.0):
            raise ParameterError("rho must be in (0, 1)")
        if self.n < 1:
            raise ParameterError("series length must be >= 1")


def cross_neighborhood() -> tuple[tuple[int, int], ...]:
    """Default 5-point neighborhood: the point itself and its 4 closest."""
    return ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class SpatialMaSpec:
    """Gumbel lattice directed by a spatial stable moving average.

    The neighborhood is a symmetric, reflexive offset set; c_{(i,j),(k,l)} =
    delta when (i,j) is a neighbor of (k,l).
    """

    n: int
    delta: float
    mu: float | np.ndarray
    sigma: float
    alpha: float
    offsets: tuple[tuple[int, int], ...] = field(default_factory=cross_neighborhood)

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not self.delta > 0:
            raise ParameterError("delta must be positive")
        if self.n < 1:
            raise ParameterError("grid size must be >= 1")
        offs = set(self.offsets)
        if (0, 0) not in offs:
            raise ParameterError("neighborhood must contain the point itself")
        if any((-di, -dj) not in offs for (di, dj) in offs):
            raise ParameterError("neighborhood must be symmetric")


@dataclass(frozen=True)
class HierarchicalSpec:
    """Two-layer nested model: outer index beta over inner index alpha.

    r[i][j] is the innermost block size for group i, subgroup j.
    """

    mu: float
    sigma: float
    alpha: float
    beta: float
    r: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        _check_alpha(self.beta)
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if len(self.r) < 1 or any(len(ri) < 1 for ri in self.r):
            raise ParameterError("need at least one group and one subgroup each")
        if any(k < 1 for ri in self.r for k in ri):
            raise ParameterError("all innermost sizes must be >= 1")


def build_random_effects(spec: RandomEffectsSpec) -> MixtureSpec:
    """Coefficient matrix with one mixing variable per group (0/1 columns)."""
    p = sum(spec.sizes)
    m = len(spec.sizes)
    C = np.zeros((p, m))
    row = 0
    for i, n_i in enumerate(spec.sizes):
        C[row : row + n_i, i] = 1.0
        row += n_i
    return MixtureSpec(C=C, mu=spec.mu, sigma=spec.sigma, alpha=spec.alpha)


def build_hidden_ma(spec: HiddenMaSpec) -> MixtureSpec:
    """Banded coefficient matrix c_{t,k} = b_{t-k}, k = 1-q .. n."""
    n, q = spec.n, len(spec.b) - 1
    cols = range(1 - q, n + 1)
    C = np.zeros((n, n + q))
    for j, k in enumerate(cols):
        for t in range(max(1, k), min(n, k + q) + 1):
            C[t - 1, j] = spec.b[t - k]
    keep = C.max(axis=0) > 0  # leading/trailing zero coefficients drop columns
    return MixtureSpec(C=C[:, keep], mu=spec.mu, sigma=spec.sigma, alpha=spec.alpha)


def build_hidden_ar(spec: HiddenArSpec) -> MixtureSpec:
    """AR(1) with stationary start folded into the first mixing column."""
    n, rho, alpha = spec.n, spec.rho, spec.alpha
    C = np.zeros((n, n))
    t = np.arange(n)
    C[:, 0] = rho**t * (1.0 - rho**alpha) ** (-1.0 / alpha)
    for a in range(1, n):
        C[a:, a] = rho ** (t[a:] - a)
    return MixtureSpec(C=C, mu=spec.mu, sigma=spec.sigma, alpha=alpha)


def build_spatial_ma(spec: SpatialMaSpec) -> MixtureSpec:
    """Rows are grid points in row-major order; columns the active mixers."""
    n = spec.n
    grid = [(i, j) for i in range(n) for j in range(n)]
    mixers = sorted({(i + di, j + dj) for (i, j) in grid for (di, dj) in spec.offsets})
    offs = set(spec.offsets)
    C = np.zeros((len(grid), len(mixers)))
    col = {kl: idx for idx, kl in enumerate(mixers)}
    for r, (i, j) in enumerate(grid):
        for di, dj in offs:
            C[r, col[(i + di, j + dj)]] = spec.delta
    mu = np.broadcast_to(np.asarray(spec.mu, dtype=float), (n, n)).reshape(-1)
    return MixtureSpec(C=C, mu=mu, sigma=spec.sigma, alpha=spec.alpha)


# ---------------------------------------------------------------------------
# evaluation


def _gumbel_z(x, mu, sigma) -> np.ndarray:
    """z_t = exp(-(x_t - mu_t)/sigma_t); +inf coordinates give z = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-(x - mu) / sigma)


def _log_joint_cdf_from_z(C: np.ndarray, z: np.ndarray, alpha: float) -> float:
    if np.any(np.isnan(z)):
        raise ParameterError("evaluation points must not be NaN")
    if np.any(np.isinf(z) & (C.max(axis=1) > 0)):
        return -np.inf  # some coordinate at -inf
    log_f = 0.0
    for a in range(C.shape[1]):
        s = math.fsum(C[t, a] * z[t] for t in range(C.shape[0]) if C[t, a] > 0)
        if s > 0:
            log_f -= s**alpha
    return log_f


def joint_cdf(spec: MixtureSpec, x) -> float:
    """Exact joint distribution function; +inf entries marginalize exactly."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_indices,):
        raise ParameterError(
            f"x must have length {spec.n_indices}, got shape {x.shape}"
        )
    z = _gumbel_z(x, spec.mu, spec.sigma)
    return float(np.exp(_log_joint_cdf_from_z(spec.C, z, spec.alpha)))


def _pooled_coefficients(spec: MixtureSpec, subset) -> np.ndarray:
    """c_{T1,a} = sum_{t in T1} c_{t,a} exp(mu_t/sigma) for each mixer a."""
    sigma = spec.common_sigma()
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise ParameterError("subset must be nonempty")
    w = np.exp(spec.mu[subset] / sigma)
    return w @ spec.C[subset, :]


def max_distribution(spec: MixtureSpec, subset=None) -> GumbelParams:
    """Law of max over a subset of indices: Gumbel with scale sigma/alpha.

    Requires a common scale parameter.  Defaults to the maximum over all
    indices.
    """
    if subset is None:
        subset = np.arange(spec.n_indices)
    sigma = spec.common_sigma()
    alpha = spec.alpha
    pooled = _pooled_coefficients(spec, subset)
    loc = (sigma / alpha) * float(np.log(np.sum(pooled**alpha)))
    return GumbelParams(mu=loc, sigma=sigma / alpha)


def joint_max_cdf(spec: MixtureSpec, subset1, subset2, x1: float, x2: float) -> float:
    """Joint cdf of maxima over two disjoint index subsets.

    Overlapping subsets are rejected: the closed form only covers the
    disjoint case.
    """
    s1 = np.asarray(subset1, dtype=int)
    s2 = np.asarray(subset2, dtype=int)
    if np.intersect1d(s1, s2).size > 0:
        raise ParameterError("subsets must be disjoint")
    sigma = spec.common_sigma()
    c1 = _pooled_coefficients(spec, s1)
    c2 = _pooled_coefficients(spec, s2)
    with np.errstate(over="ignore"):
        z1 = np.exp(-float(x1) / sigma)
        z2 = np.exp(-float(x2) / sigma)
    if np.isinf(z1) or np.isinf(z2):
        return 0.0
    s = c1 * z1 + c2 * z2
    return float(np.exp(-np.sum(s[s > 0] ** spec.alpha)))


def _unflatten_hierarchical(spec: HierarchicalSpec, x):
    """Reshape a flat coordinate vector into the nested x[i][j][k] layout."""
    x = np.asarray(x, dtype=float)
    total = sum(k for ri in spec.r for k in ri)
    if x.shape != (total,):
        raise ParameterError(f"x must have length {total}, got shape {x.shape}")
    nested = []
    pos = 0
    for ri in spec.r:
        group = []
        for r_ij in ri:
            group.append(x[pos : pos + r_ij])
            pos += r_ij
        nested.append(group)
    return nested


def hierarchical_cdf(spec: HierarchicalSpec, x) -> float:
    """Joint cdf of the nested model.

    x may be nested as x[i][j][k] or a flat vector in (i, j, k) order.
    """
    if isinstance(x, np.ndarray) and x.ndim == 1:
        x = _unflatten_hierarchical(spec, x)
    if len(x) != len(spec.r):
        raise ParameterError("x must have one entry per outer group")
    log_f = 0.0
    for i, ri in enumerate(spec.r):
        if len(x[i]) != len(ri):
            raise ParameterError(f"group {i}: expected {len(ri)} subgroups")
        inner = 0.0
        for j, r_ij in enumerate(ri):
            xi = np.asarray(x[i][j], dtype=float)
            if xi.shape != (r_ij,):
                raise ParameterError(f"subgroup ({i},{j}): expected {r_ij} values")
            z = _gumbel_z(xi, spec.mu, spec.sigma)
            if np.any(np.isinf(z)):
                return 0.0
            s = math.fsum(z)
            if s > 0:
                inner += s**spec.alpha
        log_f -= inner**spec.beta
    return float(np.exp(log_f))


# ---------------------------------------------------------------------------
# simulation


def simulate_mixture(spec: MixtureSpec, n_replicates: int, seed: int) -> np.ndarray:
    """Exact draws, (n_replicates, p): stable shifts plus Gumbel noise."""
    if n_replicates < 0:
        raise ParameterError("number of replicates must be nonnegative")
    rng = np.random.default_rng(seed)
    law = StableLaw(spec.alpha)
    s = sample_stable_rng(law, (n_replicates, spec.n_mixers), rng)
    shift = spec.sigma * np.log(s @ spec.C.T)
    u = rng.uniform(size=(n_replicates, spec.n_indices))
    g = spec.mu - spec.sigma * np.log(-np.log(u))
    return g + shift


def simulate_hierarchical(spec: HierarchicalSpec, n_replicates: int,
                          seed: int) -> np.ndarray:
    """Exact nested-model draws, (n_replicates, total) in flat (i,j,k) order.

    Construction: outer stable S_i with index beta, inner S_{ij} with index
    alpha, location shift sigma*log(S_ij) + (sigma/alpha)*log(S_i); double
    conditioning over the two layers integrates to the nested cdf (checked
    against hierarchical_cdf by Monte Carlo in the tests).
    """
    if n_replicates < 0:
        raise ParameterError("number of replicates must be nonnegative")
    rng = np.random.default_rng(seed)
    outer_law = StableLaw(spec.beta)
    inner_law = StableLaw(spec.alpha)
    cols = []
    for ri in spec.r:
        s_i = sample_stable_rng(outer_law, n_replicates, rng)
        for r_ij in ri:
            s_ij = sample_stable_rng(inner_law, n_replicates, rng)
            shift = (spec.sigma * np.log(s_ij)
                     + (spec.sigma / spec.alpha) * np.log(s_i))
            u = rng.uniform(size=(n_replicates, r_ij))
            cols.append(spec.mu + shift[:, None] - spec.sigma * np.log(-np.log(u)))
    return np.concatenate(cols, axis=1)


def simulate(model, n_replicates: int, seed: int):
    """Simulate any supported model spec; dispatches on the spec type."""
    if isinstance(model, MixtureSpec):
        return simulate_mixture(model, n_replicates, seed)
    if isinstance(model, RandomEffectsSpec):
        return simulate_mixture(build_random_effects(model), n_replicates, seed)
    if isinstance(model, HiddenMaSpec):
        return simulate_mixture(build_hidden_ma(model), n_replicates, seed)
    if isinstance(model, HiddenArSpec):
        return simulate_mixture(build_hidden_ar(model), n_replicates, seed)
    if isinstance(model, SpatialMaSpec):
        return simulate_mixture(build_spatial_ma(model), n_replicates, seed)
    if isinstance(model, HierarchicalSpec):
        return simulate_hierarchical(model, n_replicates, seed)
    raise ParameterError(f"unsupported model spec type {type(model).__name__}")


# ---------------------------------------------------------------------------
# GEV translation


@dataclass(frozen=True)
class GevMixtureSpec:
    """A MixtureSpec with GEV margins: shared shape gamma, same C and alpha."""

    base: MixtureSpec
    gamma: float

    def __post_init__(self) -> None:
        if self.gamma == 0:
            raise ParameterError("gamma = 0 is the Gumbel case; use MixtureSpec")

    def margin(self, t: int) -> GevParams:
        return GevParams(mu=float(self.base.mu[t]), sigma=float(self.base.sigma[t]),
                         gamma=self.gamma)


def gev_translate(spec: MixtureSpec, gamma: float) -> GevMixtureSpec:
    return GevMixtureSpec(base=spec, gamma=gamma)


def _gev_z(x, mu, sigma, gamma) -> np.ndarray:
    """(1 + gamma*(x - mu)/sigma)^(-1/gamma), one-sided limits past endpoints."""
    x = np.asarray(x, dtype=float)
    arg = 1.0 + gamma * (x - mu) / sigma
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        z = np.where(arg > 0, np.power(np.maximum(arg, 1e-320), -1.0 / gamma), np.nan)
    return np.where(arg <= 0, np.inf if gamma > 0 else 0.0, z)


def gev_joint_cdf(spec: GevMixtureSpec, x) -> float:
    """Joint cdf with GEV margins (replace the exponential tail by the
    power tail; everything else unchanged)."""
    x = np.asarray(x, dtype=float)
    base = spec.base
    if x.shape != (base.n_indices,):
        raise ParameterError(f"x must have length {base.n_indices}")
    z = _gev_z(x, base.mu, base.sigma, spec.gamma)
    return float(np.exp(_log_joint_cdf_from_z(base.C, z, base.alpha)))


def gev_simulate(spec: GevMixtureSpec, n_replicates: int, seed: int) -> np.ndarray:
    """Endpoint-preserving scale-mixture draws X = H^g E + (1 - H^g) delta,
    H_t = sum_a c_{t,a} S_a and E_t conditionally GEV(mu_t, sigma_t, gamma)."""
    if n_replicates < 0:
        raise ParameterError("number of replicates must be nonnegative")
    base = spec.base
    gamma = spec.gamma
    rng = np.random.default_rng(seed)
    s = sample_stable_rng(StableLaw(base.alpha), (n_replicates, base.n_mixers), rng)
    h = s @ base.C.T
    u = rng.uniform(size=(n_replicates, base.n_indices))
    e = base.mu + base.sigma * ((-np.log(u)) ** (-gamma) - 1.0) / gamma
    delta = base.mu - base.sigma / gamma
    hg = h**gamma
    return hg * e + (1.0 - hg) * delta
