"""Truncated power series in lambda.

A series is stored by its coefficients starting at lambda^0; PowerSeries
itself holds F(lambda) = sum_{k>=1} c_k lambda^k and drops the constant.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.errors import DomainError


@dataclass(frozen=True)
class PowerSeries:
    coeffs: np.ndarray  # c_1 .. c_K

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if coeffs.size == 0:
            raise DomainError("PowerSeries needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("PowerSeries coefficients must be finite")
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def length(self) -> int:
        return int(self.coeffs.size)

    def full(self) -> np.ndarray:
        """Coefficients from lambda^0 (which is zero)."""
        return np.concatenate(([0.0], self.coeffs))

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.full())


def series_mul(a: Sequence[float], b: Sequence[float], order: int) -> np.ndarray:
    """Product truncated to coefficients 0..order-1."""
    return np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))[:order].copy()


def series_reciprocal(a: Sequence[float], order: int) -> np.ndarray:
    """1/a truncated to `order` coefficients; a[0] must be nonzero."""
    a = np.asarray(a, dtype=float)
    if a[0] == 0:
        raise DomainError("series reciprocal needs a nonzero constant term")
    out = np.zeros(order)
    out[0] = 1.0 / a[0]
    for n in range(1, order):
        m = min(n, a.size - 1)
        out[n] = -np.dot(a[1:m + 1], out[n - 1::-1][:m]) / a[0]
    return out


def series_div(num: Sequence[float], den: Sequence[float], order: int) -> np.ndarray:
    return series_mul(num, series_reciprocal(den, order), order)
