"""Dependent extremes via positive-stable mixtures of Gumbel/GEV laws."""

from .data import GroupedSample, SeriesSample, read_grouped_csv, read_series_csv
from .diagnostics import (
    QqPlotData,
    diagnostic_report,
    exps_qq,
    implied_correlation,
    within_group_correlation,
)
from .errors import (
    CapacityError,
    ConvergenceError,
    DataError,
    DegenerateLawError,
    IdentifiabilityError,
    ParameterError,
    StableMixError,
    SupportError,
)
from .estimation import (
    FitResult,
    delta_method_interval,
    fit_conditional_gumbel_models,
    fit_ma1,
    fit_random_effects,
    likelihood_ratio_test,
    observed_information,
)
from .evd import (
    GevParams,
    GumbelParams,
    gev_cdf,
    gev_pdf,
    gev_quantile,
    gev_sample,
    gumbel_cdf,
    gumbel_pdf,
    gumbel_plot_coords,
    gumbel_quantile,
    gumbel_sample,
    pwm_fit_gumbel,
)
from .likelihood import (
    DerivativeTable,
    gev_re_group_loglik,
    ma1_loglik,
    re_group_loglik,
    re_total_loglik,
    stable_derivative,
)
from .mixtures import (
    GevMixtureSpec,
    HiddenArSpec,
    HiddenMaSpec,
    HierarchicalSpec,
    MixtureSpec,
    RandomEffectsSpec,
    SpatialMaSpec,
    build_hidden_ar,
    build_hidden_ma,
    build_random_effects,
    build_spatial_ma,
    gev_joint_cdf,
    gev_simulate,
    gev_translate,
    hierarchical_cdf,
    joint_cdf,
    joint_max_cdf,
    max_distribution,
    simulate,
)
from .stable import (
    ExpSParams,
    StableLaw,
    exps_cdf,
    exps_moments,
    exps_pdf,
    exps_quantile,
    sample_exps,
    sample_stable,
    stable_cdf,
    stable_pdf,
    stable_quantile,
    stable_tail_constant,
)
from .cli import RiskQuery, risk_return_period

__version__ = "0.1.0"
