import numpy as np
import pytest
from scipy.stats import kstest

from stablemix.errors import ParameterError
from stablemix.evd import GevParams, GumbelParams, gev_cdf, gumbel_cdf
from stablemix.mixtures import (
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
    simulate_mixture,
)


def pair_spec(alpha):
    """Two exchangeable variables sharing a single mixer."""
    return MixtureSpec(C=np.ones((2, 1)), mu=0.0, sigma=1.0, alpha=alpha)


class TestJointCdf:
    def test_single_mixer_hand_value(self):
        # z = (1, 1): F = exp(-2^alpha); at alpha = 1/2 that is exp(-sqrt(2))
        spec = pair_spec(0.5)
        assert joint_cdf(spec, [0.0, 0.0]) == pytest.approx(
            np.exp(-np.sqrt(2.0)), rel=1e-14
        )

    def test_independence_at_alpha_one(self):
        spec = MixtureSpec(C=np.eye(3), mu=0.0, sigma=1.0, alpha=1.0)
        x = np.array([0.3, -0.2, 1.1])
        p = GumbelParams(0.0, 1.0)
        assert joint_cdf(spec, x) == pytest.approx(
            float(np.prod(gumbel_cdf(p, x))), rel=1e-13
        )

    def test_identity_matrix_is_independent_for_any_alpha(self):
        # disjoint mixers factorize; each margin is Gumbel(mu, sigma/alpha)
        spec = MixtureSpec(C=np.eye(2), mu=1.0, sigma=2.0, alpha=0.4)
        p = GumbelParams(1.0, 2.0 / 0.4)
        for x in ([0.0, 0.0], [2.0, -1.0]):
            assert joint_cdf(spec, x) == pytest.approx(
                float(np.prod(gumbel_cdf(p, np.asarray(x)))), rel=1e-13
            )

    def test_marginalization_by_plus_inf(self):
        spec = build_hidden_ma(HiddenMaSpec(n=4, mu=0.0, sigma=1.0, alpha=0.6,
                                            b=(1.0, 0.5)))
        full = joint_cdf(spec, [0.5, np.inf, np.inf, np.inf])
        # dropping indices 2..4 leaves the t=1 margin: Gumbel(mu + sigma*log
        # of the pooled coefficient power sum ... computed via max law
        single = max_distribution(spec, subset=[0])
        assert full == pytest.approx(float(gumbel_cdf(single, 0.5)), rel=1e-12)

    def test_minus_inf_gives_zero(self):
        spec = pair_spec(0.7)
        assert joint_cdf(spec, [-np.inf, 3.0]) == 0.0

    def test_monotone_in_each_coordinate(self):
        spec = build_hidden_ar(HiddenArSpec(n=3, mu=0.0, sigma=1.0, alpha=0.5,
                                            rho=0.6))
        base = np.zeros(3)
        f0 = joint_cdf(spec, base)
        for t in range(3):
            up = base.copy()
            up[t] = 0.5
            assert joint_cdf(spec, up) >= f0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            joint_cdf(pair_spec(0.5), [0.0, 0.0, 0.0])
        with pytest.raises(ParameterError):
            joint_cdf(pair_spec(0.5), [np.nan, 0.0])

    def test_invalid_coefficients(self):
        with pytest.raises(ParameterError):
            MixtureSpec(C=np.array([[1.0, -0.1]]), mu=0.0, sigma=1.0, alpha=0.5)
        with pytest.raises(ParameterError):
            MixtureSpec(C=np.array([[1.0], [0.0]]), mu=0.0, sigma=1.0, alpha=0.5)


class TestBuilders:
    def test_random_effects_layout(self):
        spec = build_random_effects(
            RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(2, 3))
        )
        expected = np.array(
            [[1, 0], [1, 0], [0, 1], [0, 1], [0, 1]], dtype=float
        )
        assert np.array_equal(spec.C, expected)

    def test_hidden_ma_band(self):
        spec = build_hidden_ma(HiddenMaSpec(n=3, mu=0.0, sigma=1.0, alpha=0.5,
                                            b=(1.0, 0.4)))
        expected = np.array(
            [[0.4, 1.0, 0.0, 0.0],
             [0.0, 0.4, 1.0, 0.0],
             [0.0, 0.0, 0.4, 1.0]]
        )
        assert np.allclose(spec.C, expected)

    def test_hidden_ma_order_zero_is_independence(self):
        spec = build_hidden_ma(HiddenMaSpec(n=3, mu=0.0, sigma=1.0, alpha=0.5,
                                            b=(2.0,)))
        assert np.allclose(spec.C, 2.0 * np.eye(3))

    def test_hidden_ar_stationary_margins(self):
        # every row has the same alpha-norm, so all margins coincide
        spec = build_hidden_ar(HiddenArSpec(n=5, mu=0.0, sigma=1.0, alpha=0.6,
                                            rho=0.7))
        norms = np.sum(spec.C**0.6, axis=1)
        assert np.allclose(norms, norms[0])

    def test_hidden_ar_small_rho_near_independence(self):
        spec = build_hidden_ar(HiddenArSpec(n=3, mu=0.0, sigma=1.0, alpha=0.5,
                                            rho=1e-12))
        x = np.array([0.1, -0.3, 0.8])
        # rho -> 0 limit: independent margins Gumbel(mu, sigma/alpha)
        indep = float(np.prod(gumbel_cdf(GumbelParams(0.0, 2.0), x)))
        assert joint_cdf(spec, x) == pytest.approx(indep, rel=1e-5)

    def test_spatial_single_site(self):
        spec = build_spatial_ma(SpatialMaSpec(n=1, delta=1.0, mu=0.0, sigma=1.0,
                                              alpha=0.5))
        # one site, five mixers each with coefficient 1: F(0) = exp(-5*1^0.5)
        assert joint_cdf(spec, [0.0]) == pytest.approx(np.exp(-5.0), rel=1e-12)

    def test_spatial_row_sums(self):
        spec = build_spatial_ma(SpatialMaSpec(n=3, delta=0.2, mu=0.0, sigma=1.0,
                                              alpha=0.5))
        assert spec.n_indices == 9
        assert np.allclose(np.sum(spec.C, axis=1), 5 * 0.2)

    def test_spatial_asymmetric_neighborhood_rejected(self):
        with pytest.raises(ParameterError):
            SpatialMaSpec(n=2, delta=1.0, mu=0.0, sigma=1.0, alpha=0.5,
                          offsets=((0, 0), (1, 0)))
        with pytest.raises(ParameterError):
            SpatialMaSpec(n=2, delta=1.0, mu=0.0, sigma=1.0, alpha=0.5,
                          offsets=((1, 0), (-1, 0)))


class TestMaxDistribution:
    def test_exchangeable_pair(self):
        # max of two iid-looking margins with one shared mixer:
        # F_max(x) = exp(-(2 e^{-x})^alpha), i.e. Gumbel(log(2)/alpha* sigma.., sigma/alpha)
        spec = pair_spec(0.5)
        law = max_distribution(spec)
        assert law.sigma == pytest.approx(2.0)
        assert law.mu == pytest.approx(np.log(2.0))
        x = 1.3
        assert gumbel_cdf(law, x) == pytest.approx(joint_cdf(spec, [x, x]), rel=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_diagonal_joint_cdf_random_spec(self, seed):
        rng = np.random.default_rng(seed)
        C = rng.uniform(0.05, 2.0, size=(4, 3))
        mu = rng.normal(size=4)
        spec = MixtureSpec(C=C, mu=mu, sigma=1.7, alpha=0.45)
        law = max_distribution(spec)
        for x in (-1.0, 0.5, 3.0):
            assert gumbel_cdf(law, x) == pytest.approx(
                joint_cdf(spec, np.full(4, x)), rel=1e-12
            )

    def test_subset(self):
        spec = build_hidden_ma(HiddenMaSpec(n=6, mu=0.0, sigma=1.0, alpha=0.7,
                                            b=(1.0, 0.3)))
        law = max_distribution(spec, subset=[1, 2])
        x = np.full(6, np.inf)
        x[1] = x[2] = 0.4
        assert gumbel_cdf(law, 0.4) == pytest.approx(joint_cdf(spec, x), rel=1e-12)

    def test_unequal_sigma_rejected(self):
        spec = MixtureSpec(C=np.ones((2, 1)), mu=0.0, sigma=[1.0, 2.0], alpha=0.5)
        with pytest.raises(ParameterError):
            max_distribution(spec)

    def test_joint_max_disjoint(self):
        spec = build_random_effects(
            RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(2, 2))
        )
        # maxima over the two groups are independent (disjoint mixers)
        f = joint_max_cdf(spec, [0, 1], [2, 3], 0.7, -0.2)
        m1 = max_distribution(spec, subset=[0, 1])
        m2 = max_distribution(spec, subset=[2, 3])
        assert f == pytest.approx(
            float(gumbel_cdf(m1, 0.7) * gumbel_cdf(m2, -0.2)), rel=1e-12
        )

    def test_joint_max_dependent_consistency(self):
        spec = build_hidden_ma(HiddenMaSpec(n=4, mu=0.0, sigma=1.0, alpha=0.6,
                                            b=(1.0, 0.5)))
        # diagonal of the two-subset cdf equals the cdf of the overall max
        overall = max_distribution(spec)
        x = 0.9
        assert joint_max_cdf(spec, [0, 1], [2, 3], x, x) == pytest.approx(
            float(gumbel_cdf(overall, x)), rel=1e-12
        )

    def test_joint_max_overlap_rejected(self):
        spec = pair_spec(0.5)
        with pytest.raises(ParameterError):
            joint_max_cdf(spec, [0], [0, 1], 0.0, 0.0)


class TestHierarchical:
    def test_hand_value(self):
        spec = HierarchicalSpec(mu=0.0, sigma=1.0, alpha=0.5, beta=0.5,
                                r=((1, 1), (1,)))
        # group 1: (1^0.5 + 1^0.5)^0.5 = sqrt(2); group 2: 1
        expected = np.exp(-np.sqrt(2.0) - 1.0)
        assert hierarchical_cdf(spec, [[np.zeros(1), np.zeros(1)], [np.zeros(1)]]) \
            == pytest.approx(expected, rel=1e-13)

    def test_flat_and_nested_agree(self):
        spec = HierarchicalSpec(mu=0.3, sigma=1.2, alpha=0.6, beta=0.8,
                                r=((2, 1), (3,)))
        flat = np.array([0.1, -0.5, 0.7, 1.1, 0.0, -0.2])
        nested = [[flat[:2], flat[2:3]], [flat[3:]]]
        assert hierarchical_cdf(spec, flat) == pytest.approx(
            hierarchical_cdf(spec, nested), rel=1e-14
        )

    def test_degenerate_indices_reduce_to_gumbel(self):
        # alpha = beta = 1 means both layers are degenerate: independence
        spec = HierarchicalSpec(mu=0.0, sigma=1.0, alpha=1.0, beta=1.0,
                                r=((2,), (1,)))
        x = np.array([0.4, -0.1, 0.9])
        indep = float(np.prod(gumbel_cdf(GumbelParams(0.0, 1.0), x)))
        assert hierarchical_cdf(spec, x) == pytest.approx(indep, rel=1e-13)

    def test_simulation_matches_cdf(self):
        spec = HierarchicalSpec(mu=0.0, sigma=1.0, alpha=0.6, beta=0.7,
                                r=((2, 1), (2,)))
        draws = simulate(spec, 200_000, seed=31)
        assert draws.shape == (200_000, 5)
        for x in (np.zeros(5), np.array([1.0, 0.0, -0.5, 0.5, 1.5])):
            p = hierarchical_cdf(spec, x)
            emp = np.mean(np.all(draws <= x, axis=1))
            se = np.sqrt(p * (1 - p) / draws.shape[0])
            assert abs(emp - p) < 4.5 * se

    def test_invalid(self):
        with pytest.raises(ParameterError):
            HierarchicalSpec(mu=0.0, sigma=1.0, alpha=0.5, beta=0.5, r=((0,),))
        with pytest.raises(ParameterError):
            HierarchicalSpec(mu=0.0, sigma=0.0, alpha=0.5, beta=0.5, r=((1,),))


class TestSimulation:
    def test_seed_determinism(self):
        spec = pair_spec(0.5)
        a = simulate_mixture(spec, 50, seed=8)
        b = simulate_mixture(spec, 50, seed=8)
        assert np.array_equal(a, b)

    def test_shapes(self):
        spec = build_spatial_ma(SpatialMaSpec(n=2, delta=0.3, mu=0.0, sigma=1.0,
                                              alpha=0.5))
        assert simulate(spec, 7, seed=0).shape == (7, 4)

    @pytest.mark.parametrize(
        "spec",
        [
            RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(2,)),
            HiddenMaSpec(n=2, mu=0.0, sigma=1.0, alpha=0.7, b=(1.0, 0.6)),
            HiddenArSpec(n=2, mu=0.0, sigma=1.0, alpha=0.6, rho=0.5),
        ],
        ids=["random-effects", "ma1", "ar1"],
    )
    def test_simulation_matches_joint_cdf(self, spec):
        draws = simulate(spec, 200_000, seed=5)
        if not isinstance(spec, RandomEffectsSpec):
            built = {
                HiddenMaSpec: build_hidden_ma,
                HiddenArSpec: build_hidden_ar,
            }[type(spec)](spec)
        else:
            built = build_random_effects(spec)
        for x in (np.zeros(2), np.array([0.8, -0.4])):
            p = joint_cdf(built, x)
            emp = np.mean(np.all(draws <= x, axis=1))
            se = np.sqrt(p * (1 - p) / draws.shape[0])
            assert abs(emp - p) < 4.5 * se

    def test_marginal_is_gumbel_scaled(self):
        # single variable, one mixer: X = G + sigma*log(S) has the max law
        spec = MixtureSpec(C=np.ones((1, 1)), mu=0.0, sigma=1.0, alpha=0.5)
        draws = simulate_mixture(spec, 20000, seed=12)[:, 0]
        law = max_distribution(spec)
        stat = kstest(draws, lambda t: gumbel_cdf(law, t))
        assert stat.pvalue > 0.01

    def test_implied_dependence_strength(self):
        spec = build_random_effects(
            RandomEffectsSpec(mu=0.0, sigma=1.0, alpha=0.5, sizes=(2,))
        )
        draws = simulate_mixture(spec, 100_000, seed=3)
        r = np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]
        assert r == pytest.approx(1.0 - 0.5**2, abs=0.02)


class TestGevMixture:
    def test_single_margin(self):
        base = MixtureSpec(C=np.ones((1, 1)), mu=0.0, sigma=1.0, alpha=0.5)
        spec = gev_translate(base, gamma=1.0)
        # margin of the mixture: GEV with scale sigma/alpha, shape gamma/alpha
        big = GevParams(mu=0.0, sigma=1.0, gamma=1.0)
        for x in (0.5, 2.0, 10.0):
            z = gev_cdf(big, x)  # exp(-t); mixture raises t to alpha
            t = -np.log(z)
            assert gev_joint_cdf(spec, [x]) == pytest.approx(
                np.exp(-(t**0.5)), rel=1e-12
            )

    def test_reduces_to_gumbel_in_the_limit(self):
        base = build_hidden_ma(HiddenMaSpec(n=3, mu=0.0, sigma=1.0, alpha=0.6,
                                            b=(1.0, 0.5)))
        spec = gev_translate(base, gamma=1e-7)
        x = np.array([0.3, -0.6, 1.2])
        assert gev_joint_cdf(spec, x) == pytest.approx(joint_cdf(base, x), abs=1e-6)

    def test_endpoint_zero_mass_below(self):
        base = pair_spec(0.5)
        spec = gev_translate(base, gamma=0.5)
        delta = -1.0 / 0.5  # mu - sigma/gamma
        assert gev_joint_cdf(spec, [delta - 1e-9, 5.0]) == 0.0
        draws = gev_simulate(spec, 5000, seed=2)
        assert np.all(draws > delta)

    def test_simulation_matches_cdf(self):
        base = pair_spec(0.6)
        spec = gev_translate(base, gamma=0.4)
        draws = gev_simulate(spec, 200_000, seed=17)
        for x in (np.array([0.5, 0.5]), np.array([2.0, 0.0])):
            p = gev_joint_cdf(spec, x)
            emp = np.mean(np.all(draws <= x, axis=1))
            se = np.sqrt(p * (1 - p) / draws.shape[0])
            assert abs(emp - p) < 4.5 * se

    def test_negative_gamma_simulation(self):
        base = pair_spec(0.5)
        spec = gev_translate(base, gamma=-0.3)
        draws = gev_simulate(spec, 200_000, seed=23)
        delta = 0.0 - 1.0 / (-0.3)
        assert np.all(draws < delta)
        x = np.array([0.2, 0.8])
        p = gev_joint_cdf(spec, x)
        emp = np.mean(np.all(draws <= x, axis=1))
        se = np.sqrt(p * (1 - p) / draws.shape[0])
        assert abs(emp - p) < 4.5 * se

    def test_gamma_zero_rejected(self):
        with pytest.raises(ParameterError):
            GevMixtureSpec(base=pair_spec(0.5), gamma=0.0)
