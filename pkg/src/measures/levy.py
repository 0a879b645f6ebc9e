"""Levy measures of excursion durations and the moment identities."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import numpy as np
import pandas as pd

from src.cfrac import CFCoefficients, branch_sign
from src.errors import DomainError, ExtendGridError, MomentDivergenceError, ValidationError
from src.measures.quadrature import fit_power_law, integrate_samples, laplace_tail
from src.measures.spectral import SpectralMeasure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevyMeasure:
    atom_inf: float
    y: np.ndarray
    density: np.ndarray
    branch: str
    x: float = float('nan')
    tail_fraction: float = 0.0  # largest share of a density value coming from beyond the z grid

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        density = np.asarray(self.density, dtype=float).ravel()
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'density', density)
        branch_sign(self.branch)
        if y.size != density.size:
            raise ValidationError("density samples do not match the y grid")
        if np.any(y <= 0) or (y.size > 1 and np.any(np.diff(y) <= 0)):
            raise ValidationError("y grid must be positive and strictly increasing")
        if self.atom_inf < 0 or np.any(density < 0):
            raise ValidationError("Levy masses must be nonnegative")

    def exponent(self, lam: float) -> float:
        """Levy-Khintchine form nu({inf}) + integral (1 - e^{-lambda y}) nu(dy)."""
        f = -np.expm1(-float(lam) * self.y) * self.density
        core, head, tail = integrate_samples(self.y, f, head=True, tail=True)
        return self.atom_inf + core + head + tail

    def small_jump_mass(self) -> float:
        """integral min(1, y) nu(dy) on the represented part."""
        return integrate_samples(self.y, np.minimum(1.0, self.y) * self.density)[0]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'y': self.y, 'density': self.density})

    def to_json(self) -> Dict:
        return {'branch': self.branch, 'x': self.x, 'atom_inf': self.atom_inf,
                'tail_fraction': self.tail_fraction}


def levy_from_spectral(sigma: SpectralMeasure, y_grid: Sequence[float], tail_budget: float = 1e-8,
                       extrapolate: bool = False) -> LevyMeasure:
    """nu(dy) = [integral z e^{-yz} sigma(dz)] dy and nu({inf}) = sigma({0}).

    Without `extrapolate` the part of sigma beyond its grid must stay under
    `tail_budget` of each density value; with it, that part is added from the
    power law fitted to the grid end (and from the atom growth law).
    """
    y = np.asarray(y_grid, dtype=float).ravel()
    if y.size == 0 or np.any(y <= 0):
        raise DomainError("Levy densities need a nonempty grid of positive durations")
    z, s = sigma.z, sigma.density
    law = fit_power_law(z, s, 'right')
    atom_law = sigma.atom_law
    density = np.empty_like(y)
    worst = 0.0
    for i, yi in enumerate(y):
        value = sum(a * w * math.exp(-yi * a) for a, w in sigma.atoms)
        if z.size > 1:
            core, head, _ = integrate_samples(z, z * s * np.exp(-yi * z), head=extrapolate)
            value += core + head
        deficit = laplace_tail(law, yi) + (atom_law.laplace(yi) if atom_law is not None else 0.0)
        total = value + deficit
        share = deficit / total if total > 0 else 0.0
        if extrapolate:
            value = total
        elif share > tail_budget:
            raise ExtendGridError(
                f"sigma beyond its grid carries {share:.2e} of nu({yi:g}); extend the z grid",
                deficit=deficit)
        worst = max(worst, share)
        density[i] = max(value, 0.0)
    logger.debug(f"Levy density on {y.size} points, largest tail share {worst:.2e}")
    return LevyMeasure(atom_inf=sigma.atom0, y=y, density=density, branch=sigma.branch, x=sigma.x,
                       tail_fraction=worst)


def moment_n(measure: Union[SpectralMeasure, LevyMeasure], n: int) -> float:
    """integral y^n nu(dy), or its spectral form n! integral z^-n sigma(dz)."""
    if n < 1:
        raise DomainError(f"moment order must be >= 1, got {n}")
    if isinstance(measure, SpectralMeasure):
        value = math.factorial(n) * measure.negative_moment(n)
    else:
        core, head, tail = integrate_samples(measure.y, measure.y ** n * measure.density,
                                             head=True, tail=True)
        value = core + head + tail
    if not np.isfinite(value):
        raise MomentDivergenceError(f"moment of order {n} diverges")
    return float(value)


def excursion_mean_duration(nu: LevyMeasure) -> float:
    """Mean duration of the finite excursions, integral y nu(dy)."""
    return moment_n(nu, 1)


def mean_duration_from_coefficients(coeffs: CFCoefficients) -> float:
    """1/(a u_1), the first-level reading of the same mean."""
    if coeffs.depth < 1 or not coeffs.u[0] > 0:
        raise MomentDivergenceError("mean duration needs a positive first coefficient")
    return 1.0 / (coeffs.a * coeffs.u[0])


def mean_local_time(U_minus_at_zero: float, U_plus_at_zero: float) -> float:
    """E[total local time at x] = 2/(U-(x,0) - U+(x,0)); infinite when recurrent."""
    gap = float(U_minus_at_zero) - float(U_plus_at_zero)
    if gap < 0:
        raise ValidationError(f"U-(x,0) - U+(x,0) = {gap} must be nonnegative")
    return math.inf if gap == 0 else 2.0 / gap
