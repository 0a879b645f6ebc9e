import numpy as np
import pytest

from src.errors import DomainError
from src.expansion import check_expansion, closed_fraction, expand_numeric, expand_symbolic_zoo, symbolic_chain
from src.models import BoundaryBehavior, bessel, brownian_drift, zoo_riccati


class TestSymbolic:
    """Closed-form coefficients of the zoo."""

    def test_brownian(self):
        coeffs = expand_symbolic_zoo(brownian_drift(1.0), 'minus', 4)
        assert coeffs.u0 == 0.0
        np.testing.assert_allclose(coeffs.u, [2.0] * 4)
        plus = expand_symbolic_zoo(brownian_drift(1.0), 'plus', 3)
        assert plus.u0 == -2.0
        np.testing.assert_allclose(plus.u, [2.0] * 3)

    def test_bessel_minus(self):
        coeffs = expand_symbolic_zoo(bessel(0.5), 'minus', 3, x=2.0)
        assert coeffs.u0 == 0.0
        np.testing.assert_allclose(coeffs.u, [1.5, 2.5, 3.5])

    def test_bessel_killed_minus(self):
        coeffs = expand_symbolic_zoo(bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING), 'minus', 2, x=1.0)
        np.testing.assert_allclose(coeffs.u0, 1.0)
        np.testing.assert_allclose(coeffs.u, [3.0, 5.0])

    def test_bessel_plus(self):
        coeffs = expand_symbolic_zoo(bessel(0.5), 'plus', 2, x=1.0)
        np.testing.assert_allclose(coeffs.u0, -1.0)
        np.testing.assert_allclose(coeffs.u, [-1.0, -3.0])

    def test_depth_zero(self):
        coeffs = expand_symbolic_zoo(bessel(1.5), 'plus', 0, x=1.0)
        assert coeffs.depth == 0
        np.testing.assert_allclose(coeffs.u0, -3.0)

    def test_rejected(self):
        with pytest.raises(DomainError):
            expand_symbolic_zoo(brownian_drift(0.0), 'minus', 3)
        with pytest.raises(DomainError):
            expand_symbolic_zoo(bessel(-1.5), 'minus', 3)
        with pytest.raises(DomainError):
            expand_symbolic_zoo(bessel(0.5), 'minus', -1)


class TestChains:
    """Environment chains satisfy their recurrences."""

    @pytest.mark.parametrize('model', [brownian_drift(1.0), bessel(0.5), bessel(1.5)])
    def test_symbolic_chain_residuals(self, model):
        chain = symbolic_chain(model, 'minus', 5)
        grid = np.linspace(0.5, 3.0, 11)
        assert chain.depth == 5
        assert chain.recurrence_residual(grid) < 1e-12
        assert chain.riccati_residual(grid) < 1e-10

    def test_chain_matches_coefficients(self):
        model = bessel(0.5)
        chain = symbolic_chain(model, 'minus', 4)
        from_chain = chain.coefficients_at(1.7)
        direct = expand_symbolic_zoo(model, 'minus', 4, x=1.7)
        np.testing.assert_allclose(from_chain.u, direct.u, rtol=1e-12)

    def test_to_json(self):
        document = symbolic_chain(brownian_drift(1.0), 'plus', 2).to_json([0.0, 1.0])
        assert [level['n'] for level in document['levels']] == [0, 1, 2]
        assert document['anchors'] == ['closed-form'] * 3


class TestNumeric:
    """The mesh expansion reproduces the closed forms."""

    def test_brownian(self):
        chain = expand_numeric(brownian_drift(1.0).spec, 'minus', 4, [-1.0, 0.0, 1.0])
        for x in (-1.0, 0.0, 1.0):
            coeffs = chain.coefficients_at(x)
            np.testing.assert_allclose(coeffs.u, [2.0] * 4, rtol=1e-5)
            assert abs(coeffs.u0) < 1e-8

    def test_bessel(self):
        model = bessel(0.5)
        chain = expand_numeric(model.spec, 'minus', 3, [0.5, 1.0, 2.0])
        for x in (0.5, 1.0, 2.0):
            expected = expand_symbolic_zoo(model, 'minus', 3, x=x)
            np.testing.assert_allclose(chain.coefficients_at(x).u, expected.u, rtol=1e-5)

    def test_recurrence(self):
        chain = expand_numeric(bessel(0.5).spec, 'minus', 3, [0.5, 1.0, 2.0])
        assert chain.recurrence_residual([0.7, 1.3]) < 1e-8

    def test_rejected(self):
        spec = bessel(0.5).spec
        with pytest.raises(DomainError):
            expand_numeric(spec, 'minus', 21, [1.0])
        with pytest.raises(DomainError):
            expand_numeric(spec, 'minus', 2, [-1.0])
        with pytest.raises(DomainError):
            expand_numeric(spec, 'minus', 2, [])


class TestCheck:
    """Closed fractions agree with the closed-form Riccati variables."""

    def test_brownian(self):
        model = brownian_drift(1.0)
        coeffs = expand_symbolic_zoo(model, 'minus', 6)
        assert check_expansion(model.spec, coeffs, [0.1, 1.0, 5.0], 0.0) < 1e-9

    def test_bessel(self):
        model = bessel(0.5)
        coeffs = expand_symbolic_zoo(model, 'minus', 12, x=1.0)
        assert check_expansion(model.spec, coeffs, [0.1, 0.5, 2.0], 1.0) < 1e-8

    def test_closed_fraction_value(self):
        model = brownian_drift(1.0)
        coeffs = expand_symbolic_zoo(model, 'plus', 3)
        np.testing.assert_allclose(closed_fraction(coeffs, 1.5), zoo_riccati(model, 'plus', 0.0, 1.5),
                                   rtol=1e-12)

    def test_depth_zero_is_u0(self):
        coeffs = expand_symbolic_zoo(bessel(1.5), 'plus', 0, x=1.0)
        np.testing.assert_allclose(closed_fraction(coeffs, 0.7), -3.0)
