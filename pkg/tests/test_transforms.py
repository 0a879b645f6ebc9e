import json

import numpy as np
import pytest

from src.errors import (
    DomainError, HypothesisError, InvalidHError, PreconditionError, ValidationError, exit_code_for,
)
from src.models import (
    BoundaryBehavior, DiffusionSpec, bessel, brownian_drift, from_expression, identify_zoo, zoo_riccati,
)
from src.transforms import (
    KREIN_DUAL, T_H, check_grid, ct_pair, expansion_chain, expected_images, h_transform, image_table_rows,
    krein_dual, riccati_map, t_h,
)


class TestHTransform:
    """Doob h-transforms by phi(., 0)."""

    def test_brownian_plus(self):
        record = h_transform(brownian_drift(1.0).spec, 'plus')
        assert identify_zoo(record.output).key == ('brownian_drift', -1.0, 0.0, None)

    def test_constant_h_is_identity(self):
        spec = bessel(0.5).spec
        record = h_transform(spec, 'minus')
        assert record.output is spec

    def test_riccati_shift(self):
        model = brownian_drift(1.0)
        record = h_transform(model.spec, 'plus')
        lam = 0.8
        mapped = riccati_map(record, zoo_riccati(model, 'plus', 0.0, lam), 0.0, lam)
        np.testing.assert_allclose(mapped, zoo_riccati(brownian_drift(-1.0), 'plus', 0.0, lam), rtol=1e-12)

    def test_invalid_h(self):
        with pytest.raises(InvalidHError):
            h_transform(brownian_drift(1.0).spec, 'minus', from_expression("x"))

    def test_custom_needs_h(self):
        spec = bessel(0.5).spec.with_boundaries(BoundaryBehavior.ENTRANCE, BoundaryBehavior.NATURAL)
        custom = DiffusionSpec(interval=spec.interval, a=from_expression("1 + x^2"), wprime=spec.wprime,
                            x0=spec.x0, left=spec.left, right=spec.right)
        with pytest.raises(InvalidHError):
            h_transform(custom, 'plus')


class TestKreinDual:
    """Speed and scale exchanged."""

    def test_bessel(self):
        record = krein_dual(bessel(0.5).spec)
        assert record.kind == KREIN_DUAL
        assert identify_zoo(record.output).key == ('bessel', 0.0, -1.5, None)

    def test_regular_kinds_swap(self):
        record = krein_dual(bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING).spec)
        assert record.output.left == BoundaryBehavior.REFLECTING

    @pytest.mark.parametrize('lam', [0.3, 2.0])
    def test_riccati_map(self, lam):
        model = brownian_drift(1.0)
        record = krein_dual(model.spec)
        mapped = riccati_map(record, zoo_riccati(model, 'minus', 0.0, lam), 0.0, lam)
        np.testing.assert_allclose(mapped, zoo_riccati(brownian_drift(-1.0), 'minus', 0.0, lam), rtol=1e-12)

    def test_bessel_riccati_map(self):
        model = bessel(0.5)
        record = krein_dual(model.spec)
        x, lam = 1.3, 0.7
        mapped = riccati_map(record, zoo_riccati(model, 'minus', x, lam), x, lam)
        dual = identify_zoo(record.output)
        np.testing.assert_allclose(mapped, zoo_riccati(dual, 'minus', x, lam), rtol=1e-10)

    def test_non_singular_needs_a_condition(self):
        spec = bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING).spec
        with pytest.raises(PreconditionError):
            krein_dual(spec.with_boundaries(BoundaryBehavior.NATURAL, BoundaryBehavior.NATURAL))


class TestChain:
    """Iterated T_h along the expansion."""

    def test_bessel_levels(self):
        records = expansion_chain(bessel(0.5).spec, 'minus', 2)
        keys = [identify_zoo(r.output).key for r in records]
        assert keys == [('bessel', 0.0, -1.5, None), ('bessel', 0.0, -2.5, None)]

    def test_t_h_is_dual_of_h_transform(self):
        spec = brownian_drift(1.0).spec
        record = t_h(spec, 'plus')
        assert identify_zoo(record.output).key == ('brownian_drift', 1.0, 0.0, None)

    def test_levels_nonnegative(self):
        with pytest.raises(ValidationError):
            expansion_chain(bessel(0.5).spec, 'minus', -1)
        assert expansion_chain(bessel(0.5).spec, 'minus', 0) == []

    def test_to_json(self):
        spec = bessel(1.5).spec
        record = t_h(spec, 'minus')
        document = record.to_json(check_grid(spec, 5))
        assert document['kind'] == T_H
        assert len(document['before']['x']) == 5


class TestTable:
    """Closure of the two families."""

    def test_all_rows_match(self):
        rows = image_table_rows()
        assert len(rows) == 30
        assert all(row['match'] for row in rows), [r for r in rows if not r['match']]

    def test_expected_images(self):
        images = expected_images(bessel(0.5))
        assert images['plus'] == ('bessel', 0.0, -0.5, BoundaryBehavior.KILLING)
        assert images['dual'] == ('bessel', 0.0, -1.5, None)

    def test_driftless_brownian_has_no_row(self):
        with pytest.raises(DomainError):
            expected_images(brownian_drift(0.0))


class TestCiesielskiTaylor:
    """Partners whose hitting times match occupation times."""

    def test_bessel(self):
        partner, note = ct_pair(bessel(1.5).spec)
        assert identify_zoo(partner).key == ('bessel', 0.0, 0.5, None)
        assert note['renormalized'] is True
        np.testing.assert_allclose(note['shift'], 1.0 / 3.0, rtol=1e-8)

    def test_half_order(self):
        partner, _ = ct_pair(bessel(0.5).spec)
        assert identify_zoo(partner).key == ('bessel', 0.0, -0.5, BoundaryBehavior.REFLECTING)

    def test_brownian(self):
        partner, note = ct_pair(brownian_drift(1.0).spec)
        assert identify_zoo(partner).key == ('brownian_drift', 1.0, 0.0, None)
        assert 'renormalization' in note

    def test_literal_hypothesis(self):
        with pytest.raises(HypothesisError) as info:
            ct_pair(brownian_drift(1.0).spec, renormalize=False)
        assert info.value.failed == [2]
        assert exit_code_for(info.value) == 4
        assert json.loads(info.value.note)['scale_at_r'] == pytest.approx(0.5, rel=1e-8)

    def test_left_scale_must_diverge(self):
        with pytest.raises(HypothesisError) as info:
            ct_pair(brownian_drift(-1.0).spec)
        assert 1 in info.value.failed


class TestDuality:
    """Involution and the product identity of the dual pair."""

    @pytest.mark.parametrize('model', [brownian_drift(0.7), bessel(1.5),
                                       bessel(-0.5, zero_boundary=BoundaryBehavior.KILLING)])
    def test_involution(self, model):
        twice = krein_dual(krein_dual(model.spec).output).output
        assert identify_zoo(twice).key == model.key

    @pytest.mark.parametrize('branch', ['plus', 'minus'])
    def test_product(self, branch):
        model = bessel(1.5)
        dual = identify_zoo(krein_dual(model.spec).output)
        for x in (0.5, 1.0, 3.0):
            for lam in (0.2, 1.0, 5.0):
                product = zoo_riccati(model, branch, x, lam) * zoo_riccati(dual, branch, x, lam)
                np.testing.assert_allclose(product, 2.0 * lam, rtol=1e-8)
