import numpy as np
import pytest

from src.errors import DomainError, ValidationError
from src.sim import (
    SDEConfig, correlation, fokker_planck_residual, gamma_law, gig_cdf_quadrature, gig_law, gig_normalization,
    gig_reciprocal_mean, ks_one_sample, sample_random_cfrac, simulate_U, simulate_hierarchy, standard_error,
)


def small_config(mu=1.0, depth=1, n_samples=4096, chains=512, chains_per_block=512, seed=7):
    return SDEConfig(mu=mu, depth=depth, step=5e-3, burn_in=100.0 * max(1.0, 1.0 / mu), n_samples=n_samples,
                     thin=1.0, seed=seed, chains=chains, chains_per_block=chains_per_block)


class TestConfig:
    """Validation of the SDE settings."""

    def test_drift_positive(self):
        with pytest.raises(ValidationError):
            SDEConfig(mu=0.0)

    def test_burn_in(self):
        with pytest.raises(ValidationError):
            SDEConfig(mu=0.5, burn_in=100.0)

    def test_step_against_thin(self):
        with pytest.raises(ValidationError):
            SDEConfig(mu=1.0, step=0.2, thin=1.0)

    def test_per_chain(self):
        assert small_config(n_samples=1000, chains=300).per_chain == 4


class TestHierarchy:
    """Stationary law of the coefficient hierarchy."""

    def test_gamma_marginal(self):
        pool = simulate_hierarchy(small_config())
        assert pool.n == 4096
        assert ks_one_sample(pool, gamma_law(1.0).cdf) < 0.05

    def test_mean(self):
        pool = simulate_hierarchy(small_config(mu=2.0))
        values = pool.column(0)
        assert abs(values.mean() - 4.0) < 4.0 * standard_error(values) + 0.05

    def test_levels_uncorrelated(self):
        pool = simulate_hierarchy(small_config(depth=2))
        assert pool.values.shape == (4096, 2)
        assert abs(correlation(pool, 0, 1)) < 0.1
        assert ks_one_sample(pool, gamma_law(1.0).cdf, column=1) < 0.06

    def test_thread_count_does_not_change_samples(self):
        cfg = small_config(n_samples=1024, chains=256, chains_per_block=64)
        np.testing.assert_array_equal(simulate_hierarchy(cfg, threads=1).values,
                                      simulate_hierarchy(cfg, threads=4).values)

    def test_depth_limit(self):
        with pytest.raises(ValidationError):
            simulate_hierarchy(small_config(depth=9))

    def test_fokker_planck(self):
        assert fokker_planck_residual(1.0, depth=2) < 1e-6

    @pytest.mark.parametrize('mu', [0.7, 1.0])
    def test_fokker_planck_single_level(self, mu):
        # the one-level flux vanishes identically
        assert fokker_planck_residual(mu, depth=1) < 1e-6

    @pytest.mark.slow
    def test_three_levels_full(self):
        pool = simulate_hierarchy(SDEConfig(mu=1.0, depth=3, n_samples=100_000))
        for i in range(3):
            assert ks_one_sample(pool, gamma_law(1.0).cdf, column=i) < 0.02
        for i, j in ((0, 1), (0, 2), (1, 2)):
            assert abs(correlation(pool, i, j)) < 0.02

    @pytest.mark.slow
    def test_three_levels_step_halving(self):
        cfg = SDEConfig(mu=1.0, depth=3, n_samples=100_000)
        coarse = simulate_hierarchy(cfg)
        fine = simulate_hierarchy(SDEConfig(mu=1.0, depth=3, n_samples=100_000, step=cfg.step / 2))
        for i in range(3):
            assert abs(ks_one_sample(coarse, gamma_law(1.0).cdf, column=i)
                       - ks_one_sample(fine, gamma_law(1.0).cdf, column=i)) < 0.01


class TestRiccatiLaw:
    """Stationary law of U."""

    def test_quadrature_matches_scipy(self):
        cdf = gig_cdf_quadrature(1.0, 0.5)
        law = gig_law(1.0, 0.5)
        points = [0.2, 1.0, 3.0]
        np.testing.assert_allclose(cdf(points), law.cdf(points), rtol=1e-6)

    def test_normalization_positive(self):
        assert gig_normalization(1.0, 0.5) > 0

    def test_reciprocal_mean(self):
        expected = gig_law(1.5, 2.0).expect(lambda y: 1.0 / y)
        np.testing.assert_allclose(gig_reciprocal_mean(1.5, 2.0), expected, rtol=1e-6)

    def test_sde(self):
        pool = simulate_U(small_config(), 0.5)
        assert pool.tag == 'riccati'
        assert ks_one_sample(pool, gig_law(1.0, 0.5).cdf) < 0.05

    def test_random_fraction(self):
        pool = sample_random_cfrac(1.0, 0.5, depth=30, n_samples=4096, seed=11)
        assert ks_one_sample(pool, gig_law(1.0, 0.5).cdf) < 0.05

    def test_random_fraction_blocks(self):
        first = sample_random_cfrac(1.0, 0.5, depth=10, n_samples=3000, seed=3, block=1000, threads=1)
        second = sample_random_cfrac(1.0, 0.5, depth=10, n_samples=3000, seed=3, block=1000, threads=3)
        np.testing.assert_array_equal(first.values, second.values)

    def test_lambda_positive(self):
        with pytest.raises(DomainError):
            simulate_U(small_config(), 0.0)

    def test_gamma_law(self):
        assert gamma_law(2.0).mean() == pytest.approx(4.0)

    @pytest.mark.slow
    def test_sde_full(self):
        cfg = SDEConfig(mu=1.0, n_samples=100_000)
        coarse = ks_one_sample(simulate_U(cfg, 1.0), gig_law(1.0, 1.0).cdf)
        fine = ks_one_sample(simulate_U(SDEConfig(mu=1.0, n_samples=100_000, step=cfg.step / 2), 1.0),
                             gig_law(1.0, 1.0).cdf)
        assert coarse < 0.02
        assert abs(coarse - fine) < 0.01
