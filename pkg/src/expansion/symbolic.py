"""Closed-form expansions of the zoo Riccati variables."""
from typing import Optional

import numpy as np

from src.cfrac import CFCoefficients, branch_sign
from src.errors import DomainError
from src.expansion.chain import EnvironmentChain
from src.models.functions import RealFunction, constant, reciprocal_law
from src.models.zoo import BESSEL, BROWNIAN_DRIFT, ZooModel, riccati_at_zero


def _bessel_order(model: ZooModel, branch: str) -> float:
    """Order q with u_n = 2(q +/- n)/x."""
    if branch == 'minus':
        if model.p <= -1:
            raise DomainError(f"minus-branch expansion needs p > -1, got {model.p}")
        return -model.p if model.killing_type else model.p
    return model.p


def _levels(model: ZooModel, branch: str, depth: int):
    """(u0 coefficient, [u_n coefficients]) where Bessel values are in units of 1/x."""
    if depth < 0:
        raise DomainError(f"depth must be nonnegative, got {depth}")
    n = np.arange(1, depth + 1, dtype=float)
    if model.family == BROWNIAN_DRIFT:
        if model.mu == 0:
            raise DomainError("Brownian expansion needs mu != 0")
        return riccati_at_zero(model, branch, 0.0), np.full(depth, 2.0 * abs(model.mu))
    q = _bessel_order(model, branch)
    if branch == 'minus':
        u0 = -2.0 * model.p if model.killing_type else 0.0
        return u0, 2.0 * (q + n)
    return -2.0 * model.p, 2.0 * (q - n)


def expand_symbolic_zoo(model: ZooModel, branch: str, depth: int, x: Optional[float] = None) -> CFCoefficients:
    branch_sign(branch)
    x = model.x0 if x is None else float(x)
    u0, u = _levels(model, branch, depth)
    if model.family == BESSEL:
        if not x > 0:
            raise DomainError(f"Bessel expansion needs x > 0, got {x}")
        u0, u = u0 / x, u / x
    return CFCoefficients(u0=u0, u=u, scale=2.0, branch=branch, x=x)


def symbolic_chain(model: ZooModel, branch: str, depth: int) -> EnvironmentChain:
    """The same expansion as functions of x, in the raw sign convention."""
    sign = branch_sign(branch)
    u0, u = _levels(model, branch, depth)
    raw = [u0] + [sign * v for v in u]
    if model.family == BROWNIAN_DRIFT:
        us = [constant(v) for v in raw]
    else:
        us = [reciprocal_law(v) for v in raw]
    spec = model.spec
    wprimes = [spec.wprime]
    for n in range(1, depth + 1):
        previous = wprimes[-1]
        u_prev = us[n - 1]
        # a is constant on the zoo, so a'/2a vanishes
        wprimes.append(RealFunction(
            eval=lambda x, w=previous, v=u_prev: -v(x) - w(x),
            deriv=lambda x, w=previous, v=u_prev: -v.derivative(x) - w.derivative(x),
            label=f"W_{n}'"))
    return EnvironmentChain(spec=spec, wprimes=tuple(wprimes), us=tuple(us), branch=branch,
                            anchors=tuple(['closed-form'] * (depth + 1)))
