"""Model-checking artifacts for the random effects fit.

Per-group Gumbel plot coordinates, a qq-plot of the estimated group
locations against the fitted exponential-stable mixing law, implied versus
nonparametric within-group correlation, and a bundled report.  All outputs
are plain numbers; rendering is left to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import GroupedSample
from .errors import DataError, DegenerateLawError, ParameterError
from .estimation import (
    FitResult,
    fit_conditional_gumbel_models,
    likelihood_ratio_test,
)
from .evd import gumbel_plot_coords
from .stable import ExpSParams, exps_quantile, _check_alpha


@dataclass
class QqPlotData:
    """Paired quantiles for the mixing-distribution diagnostic plot."""

    theoretical: np.ndarray
    empirical: np.ndarray

    def __post_init__(self) -> None:
        if self.theoretical.shape != self.empirical.shape:
            raise ParameterError("quantile vectors must have equal length")

    def slope(self) -> float:
        """Least-squares slope of empirical on theoretical quantiles."""
        t, e = self.theoretical, self.empirical
        tc = t - t.mean()
        return float(np.sum(tc * (e - e.mean())) / np.sum(tc**2))


def exps_qq(group_locations, fitted: ExpSParams) -> QqPlotData:
    """qq data: sorted estimated group locations against ExpS quantiles
    at midpoint positions p_i = (i - 0.5)/m."""
    mus = np.sort(np.asarray(group_locations, dtype=float))
    m = mus.size
    if m < 2:
        raise DataError("need at least two group locations")
    if fitted.is_degenerate:
        raise DegenerateLawError("qq-plot undefined for the degenerate mixing law")
    p = (np.arange(1, m + 1) - 0.5) / m
    theo = np.array([exps_quantile(fitted, q) for q in p])
    return QqPlotData(theoretical=theo, empirical=mus)


def implied_correlation(alpha: float) -> float:
    """Within-group correlation implied by the model: 1 - alpha^2."""
    _check_alpha(alpha)
    return 1.0 - alpha**2


def within_group_correlation(data: GroupedSample) -> float:
    """Pooled Pearson correlation over all unordered within-group pairs.

    Uses grand centering (not group-wise): the model correlation 1 - alpha^2
    refers to the unconditional joint law.
    """
    pairs_x, pairs_y = [], []
    for g in data.groups:
        n = g.size
        for i in range(n):
            for j in range(i + 1, n):
                # both orderings, so the estimate is exchangeable
                pairs_x += [g[i], g[j]]
                pairs_y += [g[j], g[i]]
    if not pairs_x:
        raise DataError("no within-group pairs available")
    x = np.asarray(pairs_x)
    y = np.asarray(pairs_y)
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.sum(xc * yc) / np.sqrt(np.sum(xc**2) * np.sum(yc**2)))


@dataclass
class DiagnosticReport:
    """All model checks bundled for one random-effects fit."""

    group_gumbel_plots: dict[str, np.ndarray]
    exps_qq_data: QqPlotData
    implied_corr: float
    empirical_corr: float
    conditional_fits: tuple[FitResult, FitResult, FitResult]
    lrt_equal_sigma: tuple[float, float]
    lrt_pooled: tuple[float, float]
    sigma_checks: dict = field(default_factory=dict)


def diagnostic_report(fit: FitResult, data: GroupedSample) -> DiagnosticReport:
    """Assemble the full diagnostic bundle for a random effects fit.

    Estimated group locations for the qq-plot come from the common-sigma
    conditional model (model 2), matching the construction the plot checks.
    """
    est = fit.estimates
    mu_hat, sigma_hat, alpha_hat = est["mu"], est["sigma"], est["alpha"]
    model1, model2, model3 = fit_conditional_gumbel_models(data)
    df12 = len(model1.param_names) - len(model2.param_names)
    df23 = len(model2.param_names) - len(model3.param_names)
    lrt12 = likelihood_ratio_test(model1.loglik, model2.loglik, df12)
    lrt23 = likelihood_ratio_test(model2.loglik, model3.loglik, df23)

    group_mus = model2.theta[:-1]
    qq = exps_qq(group_mus, ExpSParams(alpha=alpha_hat, mu=mu_hat, sigma=sigma_hat))

    plots = {lab: gumbel_plot_coords(g) for lab, g in zip(data.labels, data.groups)}
    pooled_sigma = float(model3.theta[1])
    report = DiagnosticReport(
        group_gumbel_plots=plots,
        exps_qq_data=qq,
        implied_corr=implied_correlation(alpha_hat),
        empirical_corr=within_group_correlation(data),
        conditional_fits=(model1, model2, model3),
        lrt_equal_sigma=lrt12,
        lrt_pooled=lrt23,
        sigma_checks={
            "sigma_hat": sigma_hat,
            "conditional_common_sigma": float(model2.theta[-1]),
            "sigma_star": sigma_hat / alpha_hat,
            "pooled_sigma": pooled_sigma,
        },
    )
    return report
