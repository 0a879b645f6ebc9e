import logging
from typing import Callable, Optional, Tuple

import numpy as np

from config.config import Config
from src.cfrac.fractions import CFCoefficients, branch_sign
from src.errors import ConvergentPoleError, DomainError, NonConvergenceError

logger = logging.getLogger(__name__)

POLE_FLOOR = 1e-300


def eval_cf_fixed(coeffs: CFCoefficients, lam, depth: Optional[int] = None, tail=None):
    """N-th convergent by backward recurrence; vectorized over lambda.

    `tail`, when given, closes the fraction with the remainder value
    (array-like over lambda) instead of truncating after u_N.
    """
    n = coeffs.depth if depth is None else int(depth)
    if n < 0 or n > coeffs.depth:
        raise DomainError(f"depth {n} not in [0, {coeffs.depth}]")
    lam = np.asarray(lam)
    dtype = complex if np.iscomplexobj(lam) or np.iscomplexobj(tail) else float
    lam = lam.astype(dtype)
    if n == 0:
        return coeffs.u0 + 0.0 * lam
    zero = lam == 0
    num = coeffs.scale * lam
    t = np.full(lam.shape, coeffs.u[n - 1], dtype=dtype)
    if tail is not None:
        tail = np.broadcast_to(np.asarray(tail, dtype=dtype), lam.shape)
        t = t + np.where(zero, 0.0, num / np.where(zero, 1.0, tail))
    for level in range(n - 1, 0, -1):
        if np.any((np.abs(t) < POLE_FLOOR) & ~zero):
            raise ConvergentPoleError(f"vanishing denominator at level {level + 1}", level=level + 1)
        t = coeffs.u[level - 1] + np.where(zero, 0.0, num / np.where(zero, 1.0, t))
    if np.any((np.abs(t) < POLE_FLOOR) & ~zero):
        raise ConvergentPoleError("vanishing denominator at level 1", level=1)
    f = np.where(zero, 0.0, num / np.where(zero, 1.0, t))
    value = coeffs.u0 + coeffs.sign * f
    return value if value.ndim else value[()]


def coefficient_source(coeffs: CFCoefficients) -> Callable[[int], float]:
    """Replayable indexed access: n = 0 gives u0."""
    def source(n: int) -> float:
        if n == 0:
            return coeffs.u0
        if n > coeffs.depth:
            raise DomainError(f"coefficient u_{n} beyond stored depth {coeffs.depth}")
        return float(coeffs.u[n - 1])
    return source


def constant_source(value: float, u0: float = 0.0) -> Callable[[int], float]:
    return lambda n: u0 if n == 0 else value


def eval_cf_adaptive(coeff_gen: Callable[[int], float], scale: float, lam: complex,
                     rel_tol: float = 1e-12, branch: str = 'minus',
                     max_depth: Optional[int] = None) -> Tuple[complex, int]:
    """Modified Lentz evaluation of u0 -/+ (scale lam)/(u_1 + (scale lam)/(u_2 + ...))."""
    if rel_tol < 1e-14:
        raise DomainError(f"rel_tol {rel_tol:g} below 1e-14")
    sign = branch_sign(branch)
    max_depth = Config.LENTZ_MAX_DEPTH if max_depth is None else max_depth
    tiny = Config.LENTZ_TINY
    u0 = coeff_gen(0)
    if lam == 0:
        return u0, 0
    a = scale * lam
    f = tiny
    c = f
    d = 0.0
    for j in range(1, max_depth + 1):
        b = coeff_gen(j)
        d = b + a * d
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < rel_tol:
            logger.debug(f"Lentz converged at depth {j}")
            return u0 + sign * f, j
    raise NonConvergenceError(f"no convergence within {max_depth} levels at lambda={lam}",
                              depth=max_depth)
