"""h-transforms, Krein duality and their composition T_h on diffusion specs."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.errors import InvalidHError, PreconditionError, ValidationError
from src.models.diffusion import (
    NEG_INF, POS_INF, BoundaryBehavior, DiffusionSpec, EndpointClass, characteristics, spec_to_json,
)
from src.models.functions import RealFunction, add, constant, log_derivative
from src.models.zoo import endpoint_class, identify_zoo, zoo_phi0

logger = logging.getLogger(__name__)

H_TRANSFORM = "h_transform"
KREIN_DUAL = "krein_dual"
T_H = "T_h"

_DUAL_KIND = {
    BoundaryBehavior.REFLECTING: BoundaryBehavior.KILLING,
    BoundaryBehavior.KILLING: BoundaryBehavior.REFLECTING,
    BoundaryBehavior.ENTRANCE: BoundaryBehavior.EXIT,
    BoundaryBehavior.EXIT: BoundaryBehavior.ENTRANCE,
    BoundaryBehavior.NATURAL: BoundaryBehavior.NATURAL,
}

_SINGULAR_KIND = {
    EndpointClass.ENTRANCE: BoundaryBehavior.ENTRANCE,
    EndpointClass.EXIT: BoundaryBehavior.EXIT,
    EndpointClass.NATURAL: BoundaryBehavior.NATURAL,
}


@dataclass(frozen=True)
class TransformRecord:
    input: DiffusionSpec
    h: RealFunction
    output: DiffusionSpec
    kind: str
    branch: Optional[str] = None

    def to_json(self, grid: Sequence[float]) -> Dict:
        return {
            'kind': self.kind,
            'branch': self.branch,
            'h': self.h.label,
            'input': spec_to_json(self.input),
            'output': spec_to_json(self.output),
            'before': characteristics(self.input, grid),
            'after': characteristics(self.output, grid),
        }


def check_grid(spec: DiffusionSpec, n: int = 9) -> np.ndarray:
    """Interior points around x0 used for positivity and identity checks."""
    l, r, x0 = spec.l, spec.r, spec.x0
    if l == NEG_INF and r == POS_INF:
        return x0 + np.linspace(-3.0, 3.0, n)
    if r == POS_INF:
        span = x0 - l if x0 > l else 1.0
        return l + span * np.geomspace(0.05, 20.0, n)
    if l == NEG_INF:
        span = r - x0 if x0 < r else 1.0
        return r - span * np.geomspace(0.05, 20.0, n)
    return l + (r - l) * np.linspace(0.05, 0.95, n)


def _placeholder(spec: DiffusionSpec, side: str) -> BoundaryBehavior:
    # a start point sitting on an endpoint needs an entrance or reflecting kind
    return BoundaryBehavior.ENTRANCE if spec.x0 == spec.endpoint(side) else BoundaryBehavior.NATURAL


def _rebuild(spec: DiffusionSpec, wprime: RealFunction, w_potential: Optional[RealFunction],
             left: Optional[BoundaryBehavior], right: Optional[BoundaryBehavior], label: str) -> DiffusionSpec:
    """New spec on the same interval; None kinds are read off the Feller classification."""
    raw = DiffusionSpec(interval=spec.interval, a=spec.a, wprime=wprime, x0=spec.x0,
                        left=left or _placeholder(spec, 'left'), right=right or _placeholder(spec, 'right'),
                        label=label, w_potential=w_potential)
    kinds = {}
    for side, given in (('left', left), ('right', right)):
        if given is not None:
            kinds[side] = given
            continue
        cls = endpoint_class(raw, side)
        kinds[side] = BoundaryBehavior.KILLING if cls == EndpointClass.NON_SINGULAR else _SINGULAR_KIND[cls]
    out = DiffusionSpec(interval=spec.interval, a=spec.a, wprime=wprime, x0=spec.x0,
                        left=kinds['left'], right=kinds['right'], label=label, w_potential=w_potential)
    model = identify_zoo(out)
    return model.spec if model is not None else out


def h_transform(spec: DiffusionSpec, branch: str, h: Optional[RealFunction] = None) -> TransformRecord:
    """Y with W' -> W' + h'/h, h = phi(., 0) of the branch (from the zoo unless supplied)."""
    if h is None:
        model = identify_zoo(spec)
        if model is None:
            raise InvalidHError(f"{spec.label or 'spec'} is not a zoo model: supply h = phi(., 0)")
        h = zoo_phi0(model, branch)
    grid = check_grid(spec)
    values = np.asarray(h(grid), dtype=float)
    if not np.all(np.isfinite(values) & (values > 0)):
        raise InvalidHError(f"h = {h.label} is not positive on the interior of {spec.label or 'spec'}")
    if np.allclose(h.derivative(grid), 0.0, rtol=0.0, atol=1e-14):
        return TransformRecord(input=spec, h=h, output=spec, kind=H_TRANSFORM, branch=branch)

    shift = log_derivative(h)
    wprime = add(spec.wprime, shift, label=f"{spec.wprime.label} + d ln h")
    w_potential = None
    if spec.w_potential is not None:
        h0 = float(h(spec.x0))
        w_potential = RealFunction(eval=lambda x: spec.w_potential(x) + np.log(h(x) / h0))
    output = _rebuild(spec, wprime, w_potential, None, None, label=f"h[{spec.label}]")
    logger.debug(f"h-transform ({branch}) of {spec.label} -> {output.label}")
    return TransformRecord(input=spec, h=h, output=output, kind=H_TRANSFORM, branch=branch)


def krein_dual(spec: DiffusionSpec) -> TransformRecord:
    """X* with speed and scale exchanged: W' -> a'/(2a) - W', anchored at x0."""
    for side in ('left', 'right'):
        kind = spec.boundary(side)
        if not kind.is_regular_kind and endpoint_class(spec, side) == EndpointClass.NON_SINGULAR:
            raise PreconditionError(
                f"{side} endpoint {spec.endpoint(side)} of {spec.label or 'spec'} is non-singular "
                f"but declared {kind.value}", endpoint=side)
    a = spec.a
    wprime = RealFunction(eval=lambda x: 0.5 * a.derivative(x) / a(x) - spec.wprime(x),
                          label=f"a'/2a - ({spec.wprime.label})")
    w_potential = None
    if spec.w_potential is not None:
        a0 = float(a(spec.x0))
        w_potential = RealFunction(eval=lambda x: 0.5 * np.log(a(x) / a0) - spec.w_potential(x))
    output = _rebuild(spec, wprime, w_potential, _DUAL_KIND[spec.left], _DUAL_KIND[spec.right],
                      label=f"dual[{spec.label}]")
    logger.debug(f"Krein dual of {spec.label} -> {output.label}")
    return TransformRecord(input=spec, h=constant(1.0), output=output, kind=KREIN_DUAL)


def t_h(spec: DiffusionSpec, branch: str, h: Optional[RealFunction] = None) -> TransformRecord:
    """T_h(X) = Krein dual of the h-transform."""
    y = h_transform(spec, branch, h)
    z = krein_dual(y.output)
    return TransformRecord(input=spec, h=y.h, output=z.output, kind=T_H, branch=branch)


def expansion_chain(spec: DiffusionSpec, branch: str, levels: int) -> List[TransformRecord]:
    """X_{n+1} = T_{h_n}(X_n), each h_n read from the zoo."""
    if levels < 0:
        raise ValidationError(f"levels must be >= 0, got {levels}")
    records = []
    current = spec
    for _ in range(levels):
        record = t_h(current, branch)
        records.append(record)
        current = record.output
    return records


def riccati_map(record: TransformRecord, U_value, x: float, lam):
    """U of the output diffusion from U of the input, at (x, lambda)."""
    lam = np.asarray(lam)
    shifted = U_value
    if record.kind in (H_TRANSFORM, T_H):
        shifted = U_value - float(log_derivative(record.h)(x))
    if record.kind == H_TRANSFORM:
        return shifted
    return 2.0 * lam / float(record.input.a(x)) / shifted
