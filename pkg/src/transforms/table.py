"""Closure of the Brownian-drift and Bessel families under the transforms."""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from src.errors import DomainError
from src.models.diffusion import BoundaryBehavior
from src.models.zoo import BESSEL, BROWNIAN_DRIFT, ZooModel, bessel, brownian_drift, identify_zoo
from src.transforms.maps import h_transform, krein_dual

logger = logging.getLogger(__name__)

KILLING = BoundaryBehavior.KILLING
REFLECTING = BoundaryBehavior.REFLECTING

# (family, parameter, zero boundary) of each row checked by default
DEFAULT_ROWS: Tuple[Tuple[str, float, Optional[BoundaryBehavior]], ...] = (
    (BROWNIAN_DRIFT, -1.0, None),
    (BROWNIAN_DRIFT, 1.0, None),
    (BESSEL, -1.5, None),
    (BESSEL, -1.0, None),
    (BESSEL, -0.5, KILLING),
    (BESSEL, -0.5, REFLECTING),
    (BESSEL, 0.0, None),
    (BESSEL, 0.5, None),
    (BESSEL, 1.0, None),
    (BESSEL, 1.5, None),
)


def _bm(mu):
    return (BROWNIAN_DRIFT, float(mu), 0.0, None)


def _bes(p, zero=None):
    return (BESSEL, 0.0, float(p) + 0.0, zero)


def expected_images(model: ZooModel) -> Dict[str, tuple]:
    """Keys of the minus/plus phi(., 0)-transforms and of the dual, by parameter range."""
    if model.family == BROWNIAN_DRIFT:
        mu = model.mu
        if mu == 0:
            raise DomainError("driftless Brownian motion has no row")
        if mu < 0:
            return {'minus': _bm(-mu), 'plus': _bm(mu), 'dual': _bm(-mu)}
        return {'minus': _bm(mu), 'plus': _bm(-mu), 'dual': _bm(-mu)}
    p = model.p
    if p <= -1:
        return {'minus': _bes(-p), 'plus': _bes(p), 'dual': _bes(-p - 1)}
    if p < 0 and model.zero_boundary == KILLING:
        return {'minus': _bes(-p), 'plus': _bes(p, KILLING), 'dual': _bes(-p - 1, REFLECTING)}
    if p < 0:
        return {'minus': _bes(p, REFLECTING), 'plus': _bes(p, REFLECTING), 'dual': _bes(-p - 1, KILLING)}
    if p == 0:
        return {'minus': _bes(0.0), 'plus': _bes(0.0), 'dual': _bes(-1.0)}
    if p < 1:
        return {'minus': _bes(p), 'plus': _bes(-p, KILLING), 'dual': _bes(-p - 1)}
    return {'minus': _bes(p), 'plus': _bes(-p), 'dual': _bes(-p - 1)}


def _describe(key: Optional[tuple]) -> str:
    if key is None:
        return "unrecognized"
    family, mu, p, zero = key
    if family == BROWNIAN_DRIFT:
        return f"BM(mu={mu:g})"
    return f"BES({p:g}" + (f", 0 {zero.value})" if zero else ")")


def _build(family: str, value: float, zero: Optional[BoundaryBehavior]) -> ZooModel:
    if family == BROWNIAN_DRIFT:
        return brownian_drift(value)
    return bessel(value, zero_boundary=zero)


def image_table_rows(rows: Sequence[Tuple[str, float, Optional[BoundaryBehavior]]] = DEFAULT_ROWS) -> List[Dict]:
    """One entry per (row, map): expected and obtained images and whether they agree."""
    results = []
    for family, value, zero in rows:
        model = _build(family, value, zero)
        expected = expected_images(model)
        obtained = {
            'minus': h_transform(model.spec, 'minus').output,
            'plus': h_transform(model.spec, 'plus').output,
            'dual': krein_dual(model.spec).output,
        }
        for name in ('minus', 'plus', 'dual'):
            image = identify_zoo(obtained[name])
            key = image.key if image is not None else None
            results.append({
                'model': model.describe(),
                'map': name,
                'expected': _describe(expected[name]),
                'obtained': _describe(key),
                'match': key == expected[name],
            })
    mismatches = sum(not row['match'] for row in results)
    logger.info(f"Checked {len(results)} transform images, {mismatches} mismatches")
    return results
