"""One-dimensional diffusions described by (a, W') on an interval.

The generator is (a/2) e^{-2W} d/dx (e^{2W} d/dx) with W(x0) = 0, so the
scale density is s'(x) = e^{-2W(x)} and the speed density m(x) = (2/a) e^{2W}.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from config.config import Config
from src.errors import (
    ClassificationUncertainError, DomainError, NumericalFailureError, ScaledResultError, ValidationError,
)
from src.models.functions import RealFunction, constant, from_expression

logger = logging.getLogger(__name__)

NEG_INF = -math.inf
POS_INF = math.inf


class BoundaryBehavior(str, Enum):
    NATURAL = "natural"
    KILLING = "killing"
    REFLECTING = "reflecting"
    ENTRANCE = "entrance-not-exit"
    EXIT = "exit-not-entrance"

    @property
    def is_regular_kind(self) -> bool:
        return self in (BoundaryBehavior.KILLING, BoundaryBehavior.REFLECTING)


class EndpointClass(str, Enum):
    NON_SINGULAR = "non-singular"
    ENTRANCE = "entrance-not-exit"
    EXIT = "exit-not-entrance"
    NATURAL = "natural"


@dataclass(frozen=True)
class DiffusionSpec:
    interval: Tuple[float, float]
    a: RealFunction
    wprime: RealFunction
    x0: float
    left: BoundaryBehavior
    right: BoundaryBehavior
    label: str = ""
    # closed form of W (anchored at x0) when known
    w_potential: Optional[RealFunction] = field(default=None, compare=False)

    def __post_init__(self):
        l, r = self.interval
        if not l < r:
            raise ValidationError(f"Empty interval ({l}, {r})")
        x0 = self.x0
        on_left = x0 == l and self.left in (BoundaryBehavior.REFLECTING, BoundaryBehavior.ENTRANCE)
        on_right = x0 == r and self.right in (BoundaryBehavior.REFLECTING, BoundaryBehavior.ENTRANCE)
        if not (l < x0 < r or on_left or on_right):
            raise ValidationError(f"Start point {x0} not inside ({l}, {r})")
        if l < x0 < r and not float(self.a(x0)) > 0:
            raise ValidationError(f"Variance a(x0) = {self.a(x0)} must be positive")

    @property
    def l(self) -> float:
        return self.interval[0]

    @property
    def r(self) -> float:
        return self.interval[1]

    def endpoint(self, side: str) -> float:
        return self.l if side == 'left' else self.r

    def boundary(self, side: str) -> BoundaryBehavior:
        return self.left if side == 'left' else self.right

    def drift(self, x):
        """b = a W'"""
        return self.a(x) * self.wprime(x)

    def interior(self, x) -> bool:
        return bool(np.all((np.asarray(x) > self.l) & (np.asarray(x) < self.r)))

    def with_boundaries(self, left: BoundaryBehavior, right: BoundaryBehavior) -> 'DiffusionSpec':
        return replace(self, left=left, right=right)


def _check_interior(spec: DiffusionSpec, x: float) -> None:
    if not spec.l < x < spec.r:
        raise DomainError(f"x = {x} outside the interior of ({spec.l}, {spec.r})")


def potential(spec: DiffusionSpec, x: float) -> float:
    """W(x) = integral of W' from x0 to x."""
    _check_interior(spec, x)
    if spec.w_potential is not None:
        return float(spec.w_potential(x))
    if x == spec.x0:
        return 0.0
    value, err = integrate.quad(lambda y: float(spec.wprime(y)), spec.x0, x,
                                epsabs=Config.QUAD_ABS_TOL, epsrel=Config.QUAD_REL_TOL,
                                limit=Config.QUAD_LIMIT)
    if not np.isfinite(value) or err > 1e-6 * max(1.0, abs(value)):
        raise NumericalFailureError(f"W({x}) quadrature did not converge", residual=err)
    return value


def _exp_scaled(log_value: float, mantissa: float, what: str) -> float:
    try:
        return mantissa * math.exp(log_value)
    except OverflowError:
        raise ScaledResultError(f"{what} overflows", log_scale=log_value, mantissa=mantissa)


def scale_density(spec: DiffusionSpec, x: float) -> float:
    return _exp_scaled(-2.0 * potential(spec, x), 1.0, f"s({x})")


def speed_density(spec: DiffusionSpec, x: float) -> float:
    return _exp_scaled(2.0 * potential(spec, x), 2.0 / float(spec.a(x)), f"m({x})")


def _quad(f: Callable, lo: float, hi: float) -> float:
    if lo == hi:
        return 0.0
    value, err = integrate.quad(f, lo, hi, epsabs=Config.QUAD_ABS_TOL,
                                epsrel=Config.QUAD_REL_TOL, limit=Config.QUAD_LIMIT)
    if not np.isfinite(value):
        return value
    if err > 1e-6 * max(1.0, abs(value)):
        raise NumericalFailureError(f"quadrature on [{lo}, {hi}] did not converge", residual=err)
    return value


def scale_function(spec: DiffusionSpec, x: float) -> float:
    """s(x) = integral of s' from x0 to x."""
    return _quad(lambda y: scale_density(spec, y), spec.x0, x)


def speed_mass(spec: DiffusionSpec, lo: float, hi: float) -> float:
    """m((lo, hi))"""
    return _quad(lambda y: speed_density(spec, y), lo, hi)


def _truncation_points(spec: DiffusionSpec, side: str):
    """Points marching from x0 to the endpoint, geometrically."""
    end = spec.endpoint(side)
    x0 = spec.x0
    for k in range(Config.MAX_TRUNCATIONS):
        if math.isinf(end):
            step = 2.0 ** k
            yield x0 + step if side == 'right' else x0 - step
        else:
            yield end + (x0 - end) * 2.0 ** (-(k + 1))


def endpoint_integral(spec: DiffusionSpec, side: str, integrand: Callable) -> Optional[float]:
    """Integral of `integrand` from x0 toward the endpoint; None when divergent.

    Integrates over successive truncations; divergence is declared when the
    increments fail to shrink (ratio >= DIVERGENCE_RATIO) on DIVERGENCE_STEPS
    consecutive truncations.
    """
    total = 0.0
    previous_increment = None
    growing = 0
    lo = spec.x0
    for hi in _truncation_points(spec, side):
        a, b = (lo, hi) if side == 'right' else (hi, lo)
        with np.errstate(over='ignore', under='ignore'):
            try:
                increment = abs(_quad(integrand, a, b))
            except (OverflowError, NumericalFailureError):
                increment = math.inf
        if not np.isfinite(increment):
            return None
        total += increment
        if increment <= Config.CONVERGENCE_REL * total or total == 0.0 and increment == 0.0:
            return total
        if previous_increment is not None and previous_increment > 0:
            if increment / previous_increment >= Config.DIVERGENCE_RATIO:
                growing += 1
                if growing >= Config.DIVERGENCE_STEPS:
                    return None
            else:
                growing = 0
        previous_increment = increment
        lo = hi
    raise ClassificationUncertainError(
        f"boundary integral toward the {side} endpoint neither converged nor diverged "
        f"after {Config.MAX_TRUNCATIONS} truncations (partial value {total:.6g})")


def _safe_scale(spec, x):
    try:
        return scale_density(spec, x)
    except ScaledResultError:
        return math.inf


def _safe_speed(spec, x):
    try:
        return speed_density(spec, x)
    except ScaledResultError:
        return math.inf


def classify_endpoint(spec: DiffusionSpec, side: str) -> EndpointClass:
    if side not in ('left', 'right'):
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    x0 = spec.x0

    def entrance_integrand(x):
        return abs(_quad(lambda y: _safe_scale(spec, y), min(x0, x), max(x0, x))) * _safe_speed(spec, x)

    def exit_integrand(x):
        return abs(_quad(lambda y: _safe_speed(spec, y), min(x0, x), max(x0, x))) * _safe_scale(spec, x)

    entrance = endpoint_integral(spec, side, entrance_integrand)
    exit_ = endpoint_integral(spec, side, exit_integrand)
    logger.debug(f"{spec.label} {side}: entrance={entrance} exit={exit_}")
    if entrance is not None and exit_ is not None:
        return EndpointClass.NON_SINGULAR
    if entrance is not None:
        return EndpointClass.ENTRANCE
    if exit_ is not None:
        return EndpointClass.EXIT
    return EndpointClass.NATURAL


def scale_limit(spec: DiffusionSpec, side: str) -> float:
    """s at the endpoint: a finite value, or NEG_INF/POS_INF."""
    value = endpoint_integral(spec, side, lambda y: _safe_scale(spec, y))
    if value is None:
        return NEG_INF if side == 'left' else POS_INF
    return -value if side == 'left' else value


_SINGULAR_KIND = {
    EndpointClass.ENTRANCE: BoundaryBehavior.ENTRANCE,
    EndpointClass.EXIT: BoundaryBehavior.EXIT,
    EndpointClass.NATURAL: BoundaryBehavior.NATURAL,
}


def behavior_for(classification: EndpointClass, requested: Optional[BoundaryBehavior]) -> BoundaryBehavior:
    """Boundary behavior consistent with an endpoint classification."""
    if classification == EndpointClass.NON_SINGULAR:
        if requested is None or not requested.is_regular_kind:
            raise ValidationError("a non-singular endpoint needs a killing or reflecting condition")
        return requested
    if requested is not None and requested.is_regular_kind:
        raise ValidationError(f"{requested.value} cannot be attached to a {classification.value} endpoint")
    return _SINGULAR_KIND[classification]


def validate_boundaries(spec: DiffusionSpec) -> DiffusionSpec:
    """Check each declared boundary behavior against the Feller classification."""
    for side in ('left', 'right'):
        declared = spec.boundary(side)
        expected = behavior_for(classify_endpoint(spec, side),
                                declared if declared.is_regular_kind else None)
        if expected != declared:
            raise ValidationError(
                f"{side} endpoint of {spec.label or 'spec'} declared {declared.value}, "
                f"classified {expected.value}")
    return spec


# JSON documents

def spec_from_json(document) -> DiffusionSpec:
    """Build a spec from a JSON document (dict or text)."""
    from src.models.zoo import bessel, brownian_drift

    if isinstance(document, str):
        document = json.loads(document)
    family = document.get('family')
    if family in ('bm', 'brownian_drift'):
        return brownian_drift(float(document['mu']), x0=float(document.get('x0', 0.0))).spec
    if family == 'bessel':
        zero = document.get('zero_boundary', 'none')
        zero = None if zero in (None, 'none') else BoundaryBehavior(zero)
        return bessel(float(document['p']), x0=float(document.get('x0', 1.0)), zero_boundary=zero).spec
    if family == 'custom':
        l = float(document.get('l', '-inf'))
        r = float(document.get('r', 'inf'))
        spec = DiffusionSpec(
            interval=(l, r),
            a=from_expression(str(document.get('a', '1'))),
            wprime=from_expression(str(document['wprime'])),
            x0=float(document['x0']),
            left=BoundaryBehavior(document.get('left', 'natural')),
            right=BoundaryBehavior(document.get('right', 'natural')),
            label=document.get('label', 'custom'),
        )
        return validate_boundaries(spec) if document.get('validate', True) else spec
    raise ValidationError(f"Unknown family: {family}")


def spec_to_json(spec: DiffusionSpec) -> Dict:
    from src.models.zoo import identify_zoo

    model = identify_zoo(spec)
    if model is not None:
        return model.to_json()
    return {
        'family': 'custom',
        'a': spec.a.label,
        'wprime': spec.wprime.label,
        'l': repr(spec.l),
        'r': repr(spec.r),
        'x0': spec.x0,
        'left': spec.left.value,
        'right': spec.right.value,
        'label': spec.label,
    }


def characteristics(spec: DiffusionSpec, grid) -> Dict[str, list]:
    """a, W', s', m sampled on a grid."""
    grid = [float(x) for x in grid]
    return {
        'x': grid,
        'a': [float(spec.a(x)) for x in grid],
        'wprime': [float(spec.wprime(x)) for x in grid],
        'scale_density': [scale_density(spec, x) for x in grid],
        'speed_density': [speed_density(spec, x) for x in grid],
    }


def unit_variance() -> RealFunction:
    return constant(1.0)
