import json
import logging
import math
from typing import Dict, Tuple

import numpy as np

from src.errors import HypothesisError
from src.models.diffusion import (
    NEG_INF, BoundaryBehavior, DiffusionSpec, endpoint_integral, scale_density, scale_function, scale_limit,
    spec_to_json, speed_density,
)
from src.models.functions import RealFunction
from src.models.zoo import identify_zoo, zoo_phi0
from src.transforms.maps import t_h

logger = logging.getLogger(__name__)

LITERAL_TOL = 1e-10
DECAY_POINTS = 12
DECAY_RATIO = 0.05

IDENTITY = "inf{t >= 0: Z_t = y} =law= integral_0^zeta 1{X_t <= y} dt, for l < x <= y < r"


def _vanishes_at_left(spec: DiffusionSpec, shifted) -> bool:
    """s(y) m(y) -> 0 as y -> l, judged on a geometric approach to l."""
    span = spec.x0 - spec.l
    values = []
    for k in range(1, DECAY_POINTS + 1):
        y = spec.l + span * 2.0 ** (-k)
        try:
            values.append(abs(shifted(y) * speed_density(spec, y)))
        except OverflowError:
            return False
    return bool(np.isfinite(values).all()) and values[-1] <= DECAY_RATIO * max(values)


def _scale_h(spec: DiffusionSpec, shift: float) -> RealFunction:
    """phi+(., 0) = -(s - s(r)), normalized at x0."""
    norm = shift - scale_function(spec, spec.x0)

    def value(x):
        return np.vectorize(lambda y: (shift - scale_function(spec, y)) / norm)(x)

    def deriv(x):
        return np.vectorize(lambda y: -scale_density(spec, y) / norm)(x)

    return RealFunction(eval=value, deriv=deriv, label="-(s - s(r))")


def ct_pair(spec: DiffusionSpec, renormalize: bool = True) -> Tuple[DiffusionSpec, Dict]:
    """Z = T_h(X) with h = phi+(., 0), whose hitting times match the occupation times of X.

    Hypotheses: (1) s(l) = -inf; (2) s(r) = 0; (3) r killing when finite;
    (4) s m -> 0 at a finite l, or integral s^2 m = inf toward l = -inf.
    With `renormalize`, (2) only asks for a finite s(r) and the scale is
    shifted by s(r) before (4) is checked; the note records the shift.
    """
    failed = []
    s_left = scale_limit(spec, 'left')
    s_right = scale_limit(spec, 'right')
    if s_left != NEG_INF:
        failed.append(1)
    finite_right = math.isfinite(s_right)
    if not finite_right or (not renormalize and abs(s_right) > LITERAL_TOL):
        failed.append(2)
    if math.isfinite(spec.r) and spec.right != BoundaryBehavior.KILLING:
        failed.append(3)
    shift = s_right if finite_right and renormalize else 0.0

    def shifted(y):
        return scale_function(spec, y) - shift

    note = {
        'identity': IDENTITY,
        'X': spec_to_json(spec),
        'scale_at_r': s_right if finite_right else 'inf',
        'renormalized': bool(renormalize and finite_right),
        'shift': shift,
    }
    if renormalize and finite_right and shift != 0.0:
        note['renormalization'] = f"s -> s - ({shift!r}) so that s(r) = 0"
    if finite_right:
        if math.isfinite(spec.l):
            ok4 = _vanishes_at_left(spec, shifted)
        else:
            ok4 = endpoint_integral(spec, 'left', lambda y: shifted(y) ** 2 * speed_density(spec, y)) is None
        if not ok4:
            failed.append(4)
    else:
        note['unchecked'] = [4]
    note['failed'] = failed
    if failed:
        raise HypothesisError(f"hypotheses {failed} fail for {spec.label or 'spec'}", failed,
                              note=json.dumps(note, sort_keys=True))

    model = identify_zoo(spec)
    h = zoo_phi0(model, 'plus') if model is not None else _scale_h(spec, s_right)
    record = t_h(spec, 'plus', h)
    note['Z'] = spec_to_json(record.output)
    logger.info(f"Ciesielski-Taylor partner of {spec.label}: {record.output.label}")
    return record.output, note
