import math

import numpy as np
import pytest

from src.errors import DomainError, HorizonTooShortError, PreconditionError, ValidationError
from src.models import BoundaryBehavior, bessel, brownian_drift
from src.sim import (
    REFLECT_FOLD, PathConfig, escape_level, hitting_time, ks_two_sample, laplace_closed_form, laplace_estimate,
    occupation_below, return_probability,
)
from src.transforms import ct_pair


class TestPathConfig:
    """Validation of the path settings."""

    def test_step_against_horizon(self):
        with pytest.raises(ValidationError):
            PathConfig(spec=brownian_drift(1.0).spec, horizon=1.0, step=0.01)

    def test_boundary_rule(self):
        with pytest.raises(ValidationError):
            PathConfig(spec=brownian_drift(1.0).spec, boundary_rule='bounce')


class TestScaleProbabilities:
    """Return probabilities and escape levels from the scale function."""

    def test_brownian_return(self):
        spec = brownian_drift(1.0).spec
        np.testing.assert_allclose(return_probability(spec, 1.0, 0.0), math.exp(-2.0), rtol=1e-8)
        assert return_probability(spec, 0.0, 1.0) == 1.0

    def test_escape_level(self):
        spec = brownian_drift(1.0).spec
        level = escape_level(spec, 0.0, 'right', 0.25)
        np.testing.assert_allclose(level, math.log(4.0) / 2.0, rtol=1e-6)
        assert escape_level(spec, 0.0, 'left', 0.25) is None

    def test_bessel_escape(self):
        np.testing.assert_allclose(escape_level(bessel(0.5).spec, 1.0, 'right', 0.25), 4.0, rtol=1e-6)


class TestHitting:
    """First passage times against their closed-form Laplace transforms."""

    def test_upward(self):
        spec = brownian_drift(1.0).spec
        pool = hitting_time(PathConfig(spec=spec, horizon=20.0, step=1e-3, n_paths=3000, seed=5), 0.0, 1.0)
        estimate, error = laplace_estimate(pool, 1.0)
        exact = laplace_closed_form(spec, 0.0, 1.0, 1.0)
        np.testing.assert_allclose(exact, math.exp(1.0 - math.sqrt(3.0)), rtol=1e-8)
        assert abs(estimate - exact) < 3.0 * error + 0.01

    def test_against_drift(self):
        spec = brownian_drift(1.0).spec
        pool = hitting_time(PathConfig(spec=spec, horizon=30.0, step=1e-3, n_paths=3000, seed=6), 1.0, 0.0)
        estimate, error = laplace_estimate(pool, 1.0)
        exact = laplace_closed_form(spec, 1.0, 0.0, 1.0)
        np.testing.assert_allclose(exact, math.exp(-1.0 - math.sqrt(3.0)), rtol=1e-8)
        assert abs(estimate - exact) < 3.0 * error + 0.005
        finite = np.isfinite(pool.values).mean()
        p = math.exp(-2.0)
        assert abs(finite - p) < 3.0 * math.sqrt(p * (1 - p) / pool.n) + 0.01

    @pytest.mark.slow
    def test_upward_full(self):
        spec = brownian_drift(1.0).spec
        pool = hitting_time(PathConfig(spec=spec, horizon=20.0, step=1e-4, n_paths=10_000), 0.0, 1.0)
        estimate, error = laplace_estimate(pool, 1.0)
        assert abs(estimate - math.exp(1.0 - math.sqrt(3.0))) < 3.0 * error

    def test_target_equals_start(self):
        pool = hitting_time(PathConfig(spec=brownian_drift(1.0).spec, n_paths=10), 0.5, 0.5)
        np.testing.assert_array_equal(pool.values, np.zeros(10))

    def test_target_outside(self):
        with pytest.raises(DomainError):
            hitting_time(PathConfig(spec=bessel(0.5).spec, n_paths=10), 1.0, -1.0)

    def test_horizon_too_short(self):
        cfg = PathConfig(spec=brownian_drift(-1.0).spec, horizon=1.0, step=1e-3, n_paths=200)
        with pytest.raises(HorizonTooShortError):
            hitting_time(cfg, 0.0, -20.0)

    def test_thread_count_does_not_change_samples(self):
        cfg = PathConfig(spec=brownian_drift(1.0).spec, horizon=20.0, step=1e-3, n_paths=1500, block=500)
        np.testing.assert_array_equal(hitting_time(cfg, 0.0, 1.0, threads=1).values,
                                      hitting_time(cfg, 0.0, 1.0, threads=4).values)

    def test_antithetic_and_fold(self):
        spec = bessel(-0.5, zero_boundary=BoundaryBehavior.REFLECTING).spec
        cfg = PathConfig(spec=spec, horizon=20.0, step=1e-3, n_paths=500, antithetic=True,
                         boundary_rule=REFLECT_FOLD)
        pool = hitting_time(cfg, 0.5, 1.0)
        assert np.all(pool.values > 0)
        assert pool.censored_fraction < 0.5


class TestOccupation:
    """Time spent below a level by a right-transient path."""

    def test_level_at_left_end(self):
        pool = occupation_below(PathConfig(spec=bessel(1.5).spec, n_paths=20), 0.0)
        np.testing.assert_array_equal(pool.values, np.zeros(20))

    def test_recurrent_to_the_right(self):
        with pytest.raises(PreconditionError):
            occupation_below(PathConfig(spec=brownian_drift(-1.0).spec, n_paths=20), 0.0)

    def test_brownian_mean(self):
        # mean time below 0 from 0 for mu = 1 is 1/(2 mu^2)
        cfg = PathConfig(spec=brownian_drift(1.0).spec, horizon=40.0, step=1e-3, n_paths=2000, seed=9)
        values = occupation_below(cfg, 0.0, start=0.0).values
        assert abs(values.mean() - 0.5) < 4.0 * values.std(ddof=1) / math.sqrt(values.size) + 0.02


class TestCiesielskiTaylorIdentity:
    """Occupation of BES(0.5) below 1 against hitting of 1 by its partner."""

    def _compare(self, n_paths):
        spec = bessel(0.5, x0=1.0).spec
        partner, _ = ct_pair(spec)
        occupation = occupation_below(PathConfig(spec=spec, horizon=60.0, step=1e-3, n_paths=n_paths, seed=1),
                                      1.0, start=0.0)
        hitting = hitting_time(PathConfig(spec=partner, horizon=60.0, step=1e-3, n_paths=n_paths, seed=2),
                               0.0, 1.0)
        return ks_two_sample(occupation, hitting)

    def test_reduced(self):
        assert self._compare(2000) < 0.08

    @pytest.mark.slow
    def test_full(self):
        assert self._compare(10_000) < 0.05
