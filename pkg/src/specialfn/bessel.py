"""Bessel functions of real order on the positive axis.

Values come from scipy.special (AMOS routines). Beyond z = 50 the modified
functions are assembled from their exponentially scaled variants, and an
overflowing result is reported with its logarithmic scale instead of inf.
"""
import logging
import math

import numpy as np
from scipy import special
from scipy.optimize import brentq

from src.errors import DomainError, NumericalFailureError, ScaledResultError
from src.specialfn.contracts import BESSEL_CONTRACT

logger = logging.getLogger(__name__)

SCALED_CROSSOVER = 50.0
MAX_ORDER = 50.0


def _check(name: str, p: float, z: float) -> None:
    z_lo, z_hi = BESSEL_CONTRACT.domain['z']
    if not np.isfinite(p) or abs(p) > MAX_ORDER:
        raise DomainError(f"{name}: order {p} outside |p| <= {MAX_ORDER}")
    if not np.isfinite(z) or z <= 0:
        raise DomainError(f"{name}: argument {z} must be positive")
    if z < z_lo or z > z_hi:
        logger.debug(f"{name}({p}, {z}) outside the accuracy range [{z_lo}, {z_hi}]")


def bessel_i_scaled(p: float, z: float) -> float:
    """e^{-z} I_p(z)"""
    _check('bessel_i_scaled', p, z)
    return float(special.ive(p, z))


def bessel_k_scaled(p: float, z: float) -> float:
    """e^{z} K_p(z)"""
    _check('bessel_k_scaled', p, z)
    return float(special.kve(p, z))


def bessel_i(p: float, z: float) -> float:
    _check('bessel_i', p, z)
    if z <= SCALED_CROSSOVER:
        return float(special.iv(p, z))
    mantissa = float(special.ive(p, z))
    if z + math.log(abs(mantissa)) > 709.0:
        raise ScaledResultError(f"I_{p}({z}) overflows", log_scale=z, mantissa=mantissa)
    return mantissa * math.exp(z)


def bessel_k(p: float, z: float) -> float:
    _check('bessel_k', p, z)
    if z <= SCALED_CROSSOVER:
        value = float(special.kv(p, z))
        if math.isinf(value):
            mantissa = float(special.kve(p, z))
            raise ScaledResultError(f"K_{p}({z}) overflows", log_scale=-z, mantissa=mantissa)
        return value
    return float(special.kve(p, z)) * math.exp(-z)


def bessel_j(p: float, z: float) -> float:
    _check('bessel_j', p, z)
    return float(special.jv(p, z))


def bessel_y(p: float, z: float) -> float:
    _check('bessel_y', p, z)
    value = float(special.yv(p, z))
    if math.isinf(value):
        raise ScaledResultError(f"Y_{p}({z}) overflows", log_scale=float('inf'), mantissa=-1.0)
    return value


def _mcmahon(p: float, k: int) -> float:
    beta = (k + p / 2.0 - 0.25) * math.pi
    mu = 4.0 * p * p
    eight_beta = 8.0 * beta
    return (beta - (mu - 1.0) / eight_beta
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eight_beta ** 3))


def bessel_j_zero(p: float, k: int, tol: float = 1e-12, max_iter: int = 100) -> float:
    """k-th positive zero of J_p.

    Zeros are bracketed by a sign-change scan (spacing of consecutive zeros
    exceeds 2.4 for p >= 0), then refined by Newton steps that fall back to
    bisection whenever they leave the bracket. The McMahon expansion seeds
    the scan extent and the first Newton iterate.
    """
    if p < 0 or p > MAX_ORDER:
        raise DomainError(f"bessel_j_zero: order {p} must lie in [0, {MAX_ORDER}]")
    if int(k) != k or k < 1:
        raise DomainError(f"bessel_j_zero: index {k} must be a positive integer")
    k = int(k)

    step = 0.5
    upper = max(_mcmahon(p, k), p + 1.0) + 4.0 * math.pi
    brackets = []
    left = max(p * 0.5, 1e-6)
    f_left = special.jv(p, left)
    while len(brackets) < k:
        right = left + step
        f_right = special.jv(p, right)
        if f_left == 0.0:
            brackets.append((left, left))
        elif f_left * f_right < 0:
            brackets.append((left, right))
        left, f_left = right, f_right
        if left > upper + 10.0 * k * math.pi:
            raise NumericalFailureError(f"no bracket for zero {k} of J_{p}")
    lo, hi = brackets[k - 1]
    if lo == hi:
        return lo

    guess = _mcmahon(p, k)
    x = guess if lo < guess < hi else 0.5 * (lo + hi)
    f_lo = special.jv(p, lo)
    for _ in range(max_iter):
        fx = special.jv(p, x)
        if fx == 0.0:
            return float(x)
        if fx * f_lo < 0:
            hi = x
        else:
            lo, f_lo = x, fx
        dfx = special.jvp(p, x)
        candidate = x - fx / dfx if dfx != 0 else lo - 1.0
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        if abs(candidate - x) < tol * max(1.0, abs(x)):
            return float(candidate)
        x = candidate
    # Newton stalled; the bracket is still valid
    try:
        return float(brentq(lambda t: special.jv(p, t), lo, hi, xtol=tol))
    except ValueError as exc:
        raise NumericalFailureError(f"zero {k} of J_{p} did not converge: {exc}")
