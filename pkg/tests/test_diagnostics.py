import numpy as np
import pytest

from stablemix.data import GroupedSample
from stablemix.diagnostics import (
    DiagnosticReport,
    QqPlotData,
    diagnostic_report,
    exps_qq,
    implied_correlation,
    within_group_correlation,
)
from stablemix.errors import DataError, DegenerateLawError, ParameterError
from stablemix.estimation import FitResult
from stablemix.mixtures import RandomEffectsSpec, simulate
from stablemix.stable import ExpSParams, exps_quantile, sample_exps


class TestQqPlot:
    def test_identity_line_when_locations_are_the_quantiles(self):
        p = ExpSParams(alpha=0.5, mu=0.0, sigma=1.0)
        m = 9
        probs = (np.arange(1, m + 1) - 0.5) / m
        locations = np.array([exps_quantile(p, q) for q in probs])
        qq = exps_qq(locations, p)
        assert np.allclose(qq.theoretical, qq.empirical, rtol=1e-10)
        assert qq.slope() == pytest.approx(1.0, rel=1e-10)

    def test_sorted_output(self):
        p = ExpSParams(alpha=0.6, mu=0.0, sigma=1.0)
        qq = exps_qq([3.0, -1.0, 0.5], p)
        assert np.all(np.diff(qq.empirical) >= 0)
        assert np.all(np.diff(qq.theoretical) >= 0)

    def test_slope_scales_with_sigma(self):
        # doubling the empirical spread doubles the fitted slope
        p = ExpSParams(alpha=0.5, mu=0.0, sigma=1.0)
        locs = np.asarray(sample_exps(p, 20, seed=2))
        s1 = exps_qq(locs, p).slope()
        s2 = exps_qq(2.0 * locs, p).slope()
        assert s2 == pytest.approx(2.0 * s1, rel=1e-10)

    def test_large_sample_slope_near_one(self):
        p = ExpSParams(alpha=0.5, mu=1.0, sigma=2.0)
        locs = np.asarray(sample_exps(p, 150, seed=5))
        assert exps_qq(locs, p).slope() == pytest.approx(1.0, abs=0.35)

    def test_degenerate_law_rejected(self):
        with pytest.raises(DegenerateLawError):
            exps_qq([0.0, 1.0], ExpSParams(alpha=1.0, mu=0.0, sigma=1.0))

    def test_too_few_locations(self):
        with pytest.raises(DataError):
            exps_qq([0.0], ExpSParams(alpha=0.5, mu=0.0, sigma=1.0))

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ParameterError):
            QqPlotData(theoretical=np.zeros(3), empirical=np.zeros(4))


class TestImpliedCorrelation:
    def test_reference_values(self):
        assert implied_correlation(1.0) == pytest.approx(0.0)
        assert implied_correlation(0.5) == pytest.approx(0.75)
        assert round(implied_correlation(0.716), 2) == 0.49

    def test_monotone_decreasing_in_alpha(self):
        alphas = np.linspace(0.05, 1.0, 30)
        vals = [implied_correlation(a) for a in alphas]
        assert np.all(np.diff(vals) < 0)

    def test_range(self):
        for a in (0.05, 0.4, 0.99):
            assert 0.0 < implied_correlation(a) < 1.0

    def test_invalid_alpha(self):
        with pytest.raises(ParameterError):
            implied_correlation(0.0)
        with pytest.raises(ParameterError):
            implied_correlation(1.5)


class TestWithinGroupCorrelation:
    def test_two_point_group_is_minus_one(self):
        # single pair (0, 1) in both orders: perfect negative correlation
        data = GroupedSample(groups=[np.array([0.0, 1.0])])
        assert within_group_correlation(data) == pytest.approx(-1.0)

    def test_identical_groups_give_plus_one(self):
        g = np.array([0.0, 0.0])
        data = GroupedSample(groups=[g, g + 5.0])
        assert within_group_correlation(data) == pytest.approx(1.0)

    def test_order_invariance(self):
        rng = np.random.default_rng(3)
        groups = [rng.normal(size=4) for _ in range(6)]
        a = within_group_correlation(GroupedSample(groups=[g.copy() for g in groups]))
        b = within_group_correlation(
            GroupedSample(groups=[rng.permutation(g) for g in groups])
        )
        assert a == pytest.approx(b, rel=1e-12)

    def test_matches_model_value_on_simulated_data(self):
        spec = RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(2,))
        X = simulate(spec, 20000, seed=11)
        data = GroupedSample(groups=[row for row in X])
        assert within_group_correlation(data) == pytest.approx(0.75, abs=0.02)

    def test_singletons_rejected(self):
        with pytest.raises(DataError):
            within_group_correlation(GroupedSample(groups=[np.array([1.0])] * 3))


@pytest.fixture(scope="module")
def report_and_data():
    spec = RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(6,) * 12)
    X = simulate(spec, 1, seed=21).reshape(12, 6)
    data = GroupedSample(groups=[row for row in X])
    fit = FitResult(
        param_names=["mu", "sigma", "alpha"],
        theta=np.array([0.0, 1.0, 0.5]),
        loglik=0.0,
    )
    return diagnostic_report(fit, data), data


class TestDiagnosticReport:
    def test_schema(self, report_and_data):
        report, data = report_and_data
        assert isinstance(report, DiagnosticReport)
        assert set(report.group_gumbel_plots) == set(data.labels)
        assert report.exps_qq_data.empirical.size == data.n_groups
        assert set(report.sigma_checks) == {
            "sigma_hat", "conditional_common_sigma", "sigma_star", "pooled_sigma",
        }

    def test_lrt_p_values_in_range(self, report_and_data):
        report, _ = report_and_data
        for stat, p in (report.lrt_equal_sigma, report.lrt_pooled):
            assert stat >= 0.0
            assert 0.0 <= p <= 1.0

    def test_correlations_consistent(self, report_and_data):
        report, data = report_and_data
        assert report.implied_corr == pytest.approx(0.75)
        assert report.empirical_corr == pytest.approx(
            within_group_correlation(data), rel=1e-12
        )

    def test_sigma_star_value(self, report_and_data):
        report, _ = report_and_data
        assert report.sigma_checks["sigma_star"] == pytest.approx(2.0)

    def test_plot_coordinate_shapes(self, report_and_data):
        report, data = report_and_data
        for lab, size in zip(data.labels, data.sizes):
            assert report.group_gumbel_plots[lab].shape == (size, 2)
