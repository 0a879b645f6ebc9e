import math

from scipy import special

from src.errors import DomainError


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma_fn: argument {x} must be positive")
    value = float(special.gamma(x))
    if math.isinf(value):
        raise DomainError(f"gamma_fn: Gamma({x}) overflows; use gammaln")
    return value


def reg_inc_gamma_lower(a: float, x: float) -> float:
    """P(a, x), the CDF of Gamma(shape a, scale 1) at x."""
    if not a > 0:
        raise DomainError(f"reg_inc_gamma_lower: shape {a} must be positive")
    if not x >= 0:
        raise DomainError(f"reg_inc_gamma_lower: argument {x} must be nonnegative")
    return float(special.gammainc(a, x))


def erf(x: float) -> float:
    if math.isnan(x):
        raise DomainError("erf: argument is NaN")
    return float(special.erf(x))
