"""Continued-fraction coefficients, S-fractions and the series construction.

Coefficients are stored in branch-normalized form

    U(x, lambda) = u0 -/+ (2 lambda/a) / (u_1 + (2 lambda/a) / (u_2 + ...))

with the upper sign for the minus branch, so that the Stieltjes regime reads
u_n > 0 on both branches.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config.config import Config
from src.cfrac.series import PowerSeries, series_reciprocal
from src.errors import (
    DomainError, NotAnSFractionError, NumericalFailureError, TerminatingFraction, ValidationError,
)

logger = logging.getLogger(__name__)

BRANCHES = ('plus', 'minus')


def branch_sign(branch: str) -> float:
    if branch not in BRANCHES:
        raise ValidationError(f"branch must be 'plus' or 'minus', got {branch!r}")
    return 1.0 if branch == 'minus' else -1.0


@dataclass(frozen=True)
class CFCoefficients:
    u0: float
    u: np.ndarray
    scale: float
    branch: str = 'minus'
    x: float = float('nan')

    def __post_init__(self):
        object.__setattr__(self, 'u', np.asarray(self.u, dtype=float).ravel())
        branch_sign(self.branch)
        if not self.scale > 0:
            raise ValidationError(f"scale 2/a must be positive, got {self.scale}")

    @property
    def depth(self) -> int:
        return int(self.u.size)

    @property
    def a(self) -> float:
        return 2.0 / self.scale

    @property
    def sign(self) -> float:
        return branch_sign(self.branch)

    def truncated(self, depth: int) -> 'CFCoefficients':
        return CFCoefficients(self.u0, self.u[:depth], self.scale, self.branch, self.x)

    def to_json(self) -> Dict:
        return {'u0': float(self.u0), 'u': [float(v) for v in self.u], 'scale': float(self.scale),
                'branch': self.branch, 'x': float(self.x)}

    @classmethod
    def from_json(cls, document: Dict) -> 'CFCoefficients':
        return cls(u0=float(document['u0']), u=document['u'], scale=float(document['scale']),
                   branch=document['branch'], x=float(document.get('x', float('nan'))))


@dataclass(frozen=True)
class SFraction:
    masses: np.ndarray  # m_0 .. m_n
    gaps: np.ndarray    # l_1 .. l_n (or l_1 .. l_{n+1})

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float).ravel()
        gaps = np.asarray(self.gaps, dtype=float).ravel()
        if masses.size == 0:
            raise ValidationError("an S-fraction needs at least one mass")
        if gaps.size not in (masses.size - 1, masses.size):
            raise ValidationError(f"{masses.size} masses need {masses.size - 1} or {masses.size} gaps")
        if np.any(masses <= 0) or np.any(gaps <= 0):
            raise ValidationError("S-fraction entries must be strictly positive")
        object.__setattr__(self, 'masses', masses)
        object.__setattr__(self, 'gaps', gaps)

    def to_json(self) -> Dict:
        return {'masses': self.masses.tolist(), 'gaps': self.gaps.tolist()}


@dataclass(frozen=True)
class KreinString:
    """Point masses m_n at positions x_n = l_1 + ... + l_n."""
    positions: np.ndarray
    masses: np.ndarray
    length: float
    total_mass: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'total_mass', float(np.sum(self.masses)))


def u_to_sfraction(coeffs: CFCoefficients) -> SFraction:
    bad = np.flatnonzero(coeffs.u <= 0)
    if bad.size:
        n = int(bad[0]) + 1
        raise NotAnSFractionError(
            f"coefficient u_{n} = {coeffs.u[n - 1]:g} breaks the positivity of the "
            f"{coeffs.branch} branch", index=n)
    return SFraction(masses=coeffs.a * coeffs.u[0::2], gaps=coeffs.u[1::2] / 2.0)


def sfraction_to_u(sf: SFraction, a_at_x: float, branch: str, x: float = float('nan')) -> CFCoefficients:
    if not a_at_x > 0:
        raise ValidationError(f"a(x) must be positive, got {a_at_x}")
    u = np.empty(sf.masses.size + sf.gaps.size)
    u[0::2] = sf.masses / a_at_x
    u[1::2] = 2.0 * sf.gaps
    return CFCoefficients(u0=0.0, u=u, scale=2.0 / a_at_x, branch=branch, x=x)


def string_of(coeffs: CFCoefficients) -> KreinString:
    sf = u_to_sfraction(coeffs)
    cumulative = np.concatenate(([0.0], np.cumsum(sf.gaps)))
    return KreinString(positions=cumulative[:sf.masses.size], masses=sf.masses,
                       length=float(cumulative[-1]))


def convergent_series(u: np.ndarray, scale: float, order: int) -> np.ndarray:
    """Coefficients lambda^1..lambda^order of (scale lambda)/(u_1 + (scale lambda)/(u_2 + ...))."""
    n_terms = order + 1
    t = np.zeros(n_terms)
    t[0] = u[-1]
    for uk in u[-2::-1]:
        shifted = np.zeros(n_terms)
        shifted[1:] = scale * series_reciprocal(t, n_terms)[:-1]
        t = shifted
        t[0] += uk
    f = np.zeros(n_terms)
    f[1:] = scale * series_reciprocal(t, n_terms)[:-1]
    return f[1:]


def series_to_u(series: PowerSeries, scale: float, depth: int,
                tol: Optional[float] = None) -> CFCoefficients:
    """Coefficients u_1..u_depth of the fraction whose expansion is `series`.

    Successive reciprocation: with F_0 = series, u_k is scale over the
    lambda-coefficient of F_{k-1} and F_k = scale lambda / F_{k-1} - u_k.
    """
    if depth < 0:
        raise DomainError(f"depth must be nonnegative, got {depth}")
    if series.length < depth:
        raise DomainError(f"{series.length} coefficients cannot determine depth {depth}")
    tol = Config.REEXPANSION_TOL if tol is None else tol
    magnitude = float(np.max(np.abs(series.coeffs)))
    g = series.coeffs.copy()
    u: List[float] = []
    for k in range(1, depth + 1):
        lead = g[0]
        if abs(lead) < Config.BREAKDOWN_TOL * magnitude:
            partial = CFCoefficients(0.0, u, scale)
            logger.info(f"series terminates after {k - 1} coefficients")
            raise TerminatingFraction(f"finite fraction: {k - 1} coefficients", recovered=k - 1,
                                      coefficients=partial)
        u.append(scale / lead)
        if k < depth:
            g = (scale * series_reciprocal(g, g.size))[1:]

    coeffs = CFCoefficients(u0=0.0, u=u, scale=scale)
    if depth:
        check = convergent_series(coeffs.u, scale, depth)
        residual = float(np.max(np.abs(check - series.coeffs[:depth])) / magnitude)
        logger.debug(f"re-expansion residual at depth {depth}: {residual:.3e}")
        if residual > tol:
            raise NumericalFailureError(f"re-expansion residual {residual:.3e} exceeds {tol:g}",
                                        residual=residual)
    return coeffs
