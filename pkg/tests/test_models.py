import math

import numpy as np
import pytest

from src.errors import DomainError, ScaledResultError, ValidationError
from src.models import (
    BoundaryBehavior, DiffusionSpec, EndpointClass, bessel, brownian_drift, classify_endpoint,
    endpoint_class, from_expression, identify_zoo, riccati_at_zero, scale_density, scale_function,
    scale_limit, spec_from_json, spec_to_json, speed_density, zoo_phi0, zoo_riccati, zoo_taylor_coefficients,
)
from src.models.functions import constant


class TestCharacteristics:
    """Scale and speed of the closed-form models."""

    def test_brownian_densities(self):
        spec = brownian_drift(1.0).spec
        np.testing.assert_allclose(scale_density(spec, 1.0), math.exp(-2.0), rtol=1e-12)
        np.testing.assert_allclose(speed_density(spec, 1.0), 2.0 * math.exp(2.0), rtol=1e-12)

    def test_density_overflow_is_typed(self):
        spec = brownian_drift(1.0).spec
        with pytest.raises(ScaledResultError) as info:
            scale_density(spec, -400.0)
        assert info.value.log_scale == pytest.approx(800.0)
        with pytest.raises(ScaledResultError):
            speed_density(spec, 400.0)

    def test_scale_function(self):
        spec = brownian_drift(1.0).spec
        np.testing.assert_allclose(scale_function(spec, 1.0), (1.0 - math.exp(-2.0)) / 2.0, rtol=1e-9)
        assert scale_function(spec, 0.0) == 0.0

    def test_scale_limits(self):
        spec = brownian_drift(1.0).spec
        np.testing.assert_allclose(scale_limit(spec, 'right'), 0.5, rtol=1e-8)
        assert scale_limit(spec, 'left') == -math.inf

    def test_bessel_scale_limit(self):
        # s'(x) = x^-2 anchored at x0 = 1
        np.testing.assert_allclose(scale_limit(bessel(0.5).spec, 'right'), 1.0, rtol=1e-8)

    def test_start_point_inside(self):
        with pytest.raises(ValidationError):
            DiffusionSpec(interval=(0.0, 1.0), a=constant(1.0), wprime=constant(0.0), x0=2.0,
                          left=BoundaryBehavior.KILLING, right=BoundaryBehavior.KILLING)


class TestClassification:
    """Feller classes of the zoo endpoints."""

    def test_bessel_zero(self):
        assert classify_endpoint(bessel(0.5).spec, 'left') == EndpointClass.ENTRANCE
        assert endpoint_class(bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING).spec,
                              'left') == EndpointClass.NON_SINGULAR
        assert endpoint_class(bessel(-1.5).spec, 'left') == EndpointClass.EXIT

    def test_brownian_ends_are_natural(self):
        spec = brownian_drift(1.0).spec
        assert endpoint_class(spec, 'right') == EndpointClass.NATURAL
        assert endpoint_class(spec, 'left') == EndpointClass.NATURAL

    def test_non_singular_zero_needs_a_condition(self):
        with pytest.raises(ValidationError):
            bessel(-0.5)

    def test_entrance_refuses_a_condition(self):
        with pytest.raises(ValidationError):
            bessel(1.0, zero_boundary=BoundaryBehavior.REFLECTING)

    def test_bessel_start_positive(self):
        with pytest.raises(ValidationError):
            bessel(0.5, x0=0.0)


class TestZoo:
    """Recognition and JSON documents."""

    def test_identify_custom_bessel(self):
        spec = spec_from_json({'family': 'custom', 'wprime': '1.5/x', 'l': '0', 'r': 'inf', 'x0': 1.0,
                               'left': 'entrance-not-exit', 'validate': False})
        model = identify_zoo(spec)
        assert model is not None
        assert model.key == ('bessel', 0.0, 1.0, None)

    def test_identify_rejects_other_environments(self):
        spec = spec_from_json({'family': 'custom', 'wprime': 'x', 'x0': 0.0, 'validate': False})
        assert identify_zoo(spec) is None

    @pytest.mark.parametrize('model', [brownian_drift(-0.7, x0=0.5), bessel(1.5, x0=2.0),
                                       bessel(-0.5, zero_boundary=BoundaryBehavior.REFLECTING)])
    def test_json_round_trip(self, model):
        document = spec_to_json(model.spec)
        back = identify_zoo(spec_from_json(document))
        assert back.key == model.key
        assert back.x0 == model.x0

    def test_custom_json(self):
        spec = spec_from_json({'family': 'custom', 'wprime': 'x', 'a': '1 + x^2', 'x0': 0.0,
                               'validate': False})
        document = spec_to_json(spec)
        assert document['family'] == 'custom'
        assert document['a'] == '1 + x^2'

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            spec_from_json('{"family": "ou"}')

    def test_describe(self):
        assert brownian_drift(1.0).describe() == "BM(mu=1)"
        assert bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING).describe() == "BES(-0.5, 0 killing)"


class TestExpressions:
    """Parsed custom characteristics."""

    def test_value_and_derivative(self):
        f = from_expression("x^2 + exp(x)")
        np.testing.assert_allclose(f(1.0), 1.0 + math.e)
        np.testing.assert_allclose(f.derivative(1.0), 2.0 + math.e)

    def test_log_and_sqrt(self):
        f = from_expression("ln(x) + sqrt(x)")
        np.testing.assert_allclose(f(4.0), math.log(4.0) + 2.0)

    @pytest.mark.parametrize('text', ["y + x", "sin(x)", "x +* 2"])
    def test_rejected(self, text):
        with pytest.raises(DomainError):
            from_expression(text)


class TestRiccati:
    """Closed-form Riccati variables."""

    def test_brownian(self):
        model = brownian_drift(1.0)
        np.testing.assert_allclose(zoo_riccati(model, 'minus', 0.3, 1.0), math.sqrt(3.0) - 1.0)
        np.testing.assert_allclose(zoo_riccati(model, 'plus', 0.3, 1.0), -1.0 - math.sqrt(3.0))

    def test_brownian_cut(self):
        with pytest.raises(DomainError):
            zoo_riccati(brownian_drift(1.0), 'minus', 0.0, -1.0)

    def test_bessel_half_order(self):
        model = bessel(0.5)
        np.testing.assert_allclose(zoo_riccati(model, 'minus', 1.0, 2.0), 2.0 / math.tanh(2.0) - 1.0,
                                   rtol=1e-12)
        np.testing.assert_allclose(zoo_riccati(model, 'plus', 1.0, 2.0), -3.0, rtol=1e-12)

    def test_bessel_domain(self):
        with pytest.raises(DomainError):
            zoo_riccati(bessel(0.5), 'minus', 0.0, 1.0)
        with pytest.raises(DomainError):
            zoo_riccati(bessel(0.5), 'minus', 1.0, -1.0)

    def test_values_at_zero(self):
        assert riccati_at_zero(brownian_drift(1.0), 'plus', 0.0) == -2.0
        assert riccati_at_zero(brownian_drift(1.0), 'minus', 0.0) == 0.0
        assert riccati_at_zero(bessel(0.5), 'plus', 1.0) == pytest.approx(-1.0)
        killed = bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING)
        assert riccati_at_zero(killed, 'minus', 2.0) == pytest.approx(0.5)

    def test_small_lambda_limit(self):
        model = bessel(1.5)
        np.testing.assert_allclose(zoo_riccati(model, 'plus', 1.2, 1e-10),
                                   riccati_at_zero(model, 'plus', 1.2), rtol=1e-4)

    def test_phi0(self):
        phi = zoo_phi0(brownian_drift(1.0), 'plus')
        np.testing.assert_allclose(phi(1.0), math.exp(-2.0))
        np.testing.assert_allclose(zoo_phi0(bessel(0.5), 'plus')(2.0), 0.5)
        assert zoo_phi0(bessel(0.5), 'minus')(3.0) == 1.0

    def test_taylor_coefficients(self):
        np.testing.assert_allclose(zoo_taylor_coefficients(brownian_drift(1.0), 'minus', 0.0, 4),
                                   [1.0, -0.5, 0.5, -0.625])
        with pytest.raises(DomainError):
            zoo_taylor_coefficients(bessel(0.5), 'plus', 1.0, 3)


ZOO = [brownian_drift(1.0), brownian_drift(-0.5), bessel(0.5), bessel(1.5, x0=2.0),
       bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING)]


class TestZooProperties:
    """Identities every zoo model satisfies."""

    @pytest.mark.parametrize('model', ZOO, ids=lambda m: m.describe())
    def test_speed_times_scale(self, model):
        for x in (model.x0 + 0.3, model.x0 + 1.7):
            product = speed_density(model.spec, x) * scale_density(model.spec, x) * float(model.spec.a(x)) / 2.0
            np.testing.assert_allclose(product, 1.0, rtol=1e-12)

    @pytest.mark.parametrize('model', ZOO, ids=lambda m: m.describe())
    def test_branch_signs(self, model):
        x = model.x0 + 0.5
        for lam in (0.1, 1.0, 10.0):
            assert zoo_riccati(model, 'minus', x, lam) > 0
            assert zoo_riccati(model, 'plus', x, lam) < 0

    @pytest.mark.parametrize('model', ZOO, ids=lambda m: m.describe())
    @pytest.mark.parametrize('branch', ['plus', 'minus'])
    def test_riccati_equation(self, model, branch):
        x, lam, h = model.x0 + 0.5, 1.3, 1e-4
        u = float(zoo_riccati(model, branch, x, lam))
        du = (float(zoo_riccati(model, branch, x + h, lam)) - float(zoo_riccati(model, branch, x - h, lam))) / (2 * h)
        residual = du + u * u + 2.0 * float(model.spec.wprime(x)) * u - 2.0 * lam
        assert abs(residual) < 1e-6

    def test_worked_values(self):
        np.testing.assert_allclose(zoo_riccati(brownian_drift(1.0), 'minus', 0.0, 1.5), 1.0, rtol=1e-14)
        spec = bessel(0.5).spec
        np.testing.assert_allclose(scale_density(spec, 2.0), 0.25, rtol=1e-12)
        np.testing.assert_allclose(speed_density(spec, 2.0), 8.0, rtol=1e-12)
        assert scale_density(spec, 1.0) == pytest.approx(1.0)
