"""Spectral measures of the Riccati variables.

Knight's representation ties U(x, .) to a measure sigma on [0, inf):

    +/-U(x, lambda) / lambda = 2 * integral sigma(dz) / (lambda + z)

with + for the minus branch and - for the plus branch, so that the Laplace
exponent is psi(lambda) = lambda * integral sigma(dz) / (lambda + z).
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from config.config import Config
from src.cfrac import branch_sign
from src.errors import (
    AtomSuspectedError, DomainError, InconsistentBranchError, NumericalFailureError, RefineGridError,
    ValidationError,
)
from src.measures.quadrature import (
    AtomLaw, PowerLaw, fit_atom_law, fit_power_law, head_integral, integrate_samples,
)
from src.models.zoo import ZooModel, zoo_riccati

logger = logging.getLogger(__name__)

RESIDUE_POINTS = 128
SCAN_POINTS = 2000
ATOM_TOL = 1e-12
ATOM_ORDER = 0.25
MASS_FLOOR = 1e-8
HEAD_FLOOR = 10.0  # head fits start this many eps from zero


def laplace_exponent(U_value, branch: str):
    """psi = +U/2 on the minus branch, -U/2 on the plus branch."""
    return branch_sign(branch) * U_value / 2.0


def atom_at_zero(U_at_zero: float, branch: str, tol: float = ATOM_TOL) -> float:
    """sigma({0}) from the lambda -> 0+ limit of U."""
    value = float(np.real(laplace_exponent(U_at_zero, branch)))
    if value < -tol:
        raise InconsistentBranchError(
            f"U(x, 0) = {U_at_zero} gives a negative atom at zero on the {branch} branch")
    return max(value, 0.0)


@dataclass(frozen=True)
class PerronDiagnostics:
    eps: Tuple[float, ...]
    raw: np.ndarray  # rows follow eps
    extrapolated: np.ndarray
    clamped: float = 0.0
    clamped_count: int = 0


@dataclass(frozen=True)
class SpectralMeasure:
    atom0: float
    atoms: Tuple[Tuple[float, float], ...]
    z: np.ndarray
    density: np.ndarray
    branch: str
    x: float = float('nan')
    diagnostics: Optional[PerronDiagnostics] = field(default=None, compare=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).ravel()
        density = np.asarray(self.density, dtype=float).ravel()
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 'density', density)
        object.__setattr__(self, 'atoms', tuple((float(a), float(w)) for a, w in self.atoms))
        branch_sign(self.branch)
        if z.size != density.size:
            raise ValidationError("density samples do not match the z grid")
        if z.size > 1 and np.any(np.diff(z) <= 0):
            raise ValidationError("z grid must be strictly increasing")
        if self.atom0 < 0 or np.any(density < 0) or any(w <= 0 or a <= 0 for a, w in self.atoms):
            raise ValidationError("spectral masses must be nonnegative")

    @property
    def atom_law(self) -> Optional[AtomLaw]:
        return fit_atom_law(self.atoms)

    def exponent(self, lam: float, extrapolate: bool = True) -> float:
        """Knight form lambda * integral sigma(dz)/(lambda + z)."""
        lam = float(lam)
        if lam == 0:
            return self.atom0
        value = self.atom0 + sum(lam * w / (lam + a) for a, w in self.atoms)
        if self.z.size > 1:
            core, head, tail = integrate_samples(self.z, lam * self.density / (lam + self.z),
                                                 head=extrapolate, tail=extrapolate)
            value += core + head + tail
        if extrapolate and self.atom_law is not None:
            value += self.atom_law.stieltjes(lam)
        return value

    def stieltjes_mass(self) -> float:
        """integral sigma(dz)/(1 + z) over the represented part."""
        value = self.exponent(1.0, extrapolate=False)
        if not np.isfinite(value):
            raise NumericalFailureError("sigma(dz)/(1+z) is not integrable on the grid")
        return value

    def negative_moment(self, n: int, extrapolate: bool = True) -> float:
        """integral z^-n sigma(dz) over (0, inf); infinite when divergent."""
        value = sum(w / a ** n for a, w in self.atoms)
        keep = self.z > 0
        z, density = self.z[keep], self.density[keep]
        if z.size > 1:
            core, _, tail = integrate_samples(z, density / z ** n, tail=extrapolate)
            value += core + tail
            if extrapolate:
                value += self._head_moment(n)
        if extrapolate and self.atom_law is not None:
            value += self.atom_law.negative_moment(n)
        return value

    def _head_moment(self, n: int) -> float:
        """z^-n sigma(dz) below the grid, from a power law fitted to the density near zero.

        Only samples resolved by the inversion enter the fit: z at least a few
        eps, and raw values that settle as eps shrinks instead of vanishing
        with it. A first resolved sample that fails this means the support
        starts inside the grid.
        """
        if self.diagnostics is None:
            resolved = np.ones(self.z.size, dtype=bool)
            reliable = self.density > 0
        else:
            eps, raw = self.diagnostics.eps, self.diagnostics.raw
            with np.errstate(all='ignore'):
                order = np.log(raw[-2] / raw[-1]) / math.log(eps[-2] / eps[-1])
            resolved = self.z >= HEAD_FLOOR * eps[-1]
            reliable = resolved & (self.density > 0) & (order < 0.5)
        if not np.any(resolved):
            return 0.0
        start = int(np.argmax(resolved))
        run = np.argmin(reliable[start:]) if not np.all(reliable[start:]) else reliable.size - start
        if run < 3:
            return 0.0
        law = fit_power_law(self.z[start:start + run], self.density[start:start + run], 'left')
        if law is None:
            return 0.0
        return head_integral(PowerLaw(law.coef, law.exponent - n, float(self.z[0])))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'z': self.z, 'density': self.density})

    def to_json(self) -> Dict:
        document = {
            'branch': self.branch,
            'x': self.x,
            'atom0': self.atom0,
            'atoms': [{'z': a, 'mass': w} for a, w in self.atoms],
        }
        if self.diagnostics is not None:
            document['clamped'] = self.diagnostics.clamped
            document['clamped_count'] = self.diagnostics.clamped_count
            document['eps'] = list(self.diagnostics.eps)
        return document


def zoo_evaluator(model: ZooModel, branch: str, x: float) -> Callable:
    """lambda -> U(x, lambda) for complex arguments."""
    return lambda lam: zoo_riccati(model, branch, x, np.asarray(lam, dtype=complex))


def _atom_part(atoms, lam):
    total = np.zeros_like(lam)
    for a, w in atoms:
        total = total + w / (lam + a)
    return 2.0 * lam * total


def stieltjes_perron_invert(U: Callable, branch: str, z_grid: Sequence[float],
                            eps_schedule: Optional[Sequence[float]] = None,
                            atoms: Sequence[Tuple[float, float]] = (), atom0: float = 0.0,
                            x: float = float('nan')) -> SpectralMeasure:
    """Density of sigma from boundary values of U just below the negative axis.

    density(z) = lim (1/2 pi) Im[+/-U(-z - i eps)/(-z - i eps)], extrapolated to
    eps -> 0 from the last two entries of the schedule assuming an O(eps) error.
    Known atoms (and atom0) are removed from U before inversion. U must accept
    arrays of complex lambda.
    """
    sign = branch_sign(branch)
    eps = np.asarray(Config.EPS_SCHEDULE if eps_schedule is None else eps_schedule, dtype=float)
    if eps.size < 3 or np.any(np.diff(eps) >= 0) or eps[-1] <= 0:
        raise DomainError(f"eps schedule must be positive, strictly decreasing, >= 3 entries: {eps}")
    z = np.asarray(z_grid, dtype=float).ravel()
    if np.any(z <= 0):
        raise DomainError("Stieltjes-Perron inversion needs z > 0")
    lam = -z[None, :] - 1j * eps[:, None]
    with np.errstate(all='ignore'):
        values = np.asarray(U(lam), dtype=complex)
    values = values - sign * (_atom_part(atoms, lam) + 2.0 * atom0)
    if not np.all(np.isfinite(values)):
        bad = z[np.where(~np.all(np.isfinite(values), axis=0))[0][0]]
        raise NumericalFailureError(f"U not finite below the axis at z = {bad}")
    raw = np.imag(sign * values / lam) / (2.0 * math.pi)

    # eps * Im U ~ eps^p: p -> 0 over an atom, 1 over a density, 1/2 at a square-root edge
    mass = eps[:, None] * raw
    with np.errstate(all='ignore'):
        order = np.log(mass[:-1] / mass[1:]) / np.log(eps[:-1] / eps[1:])[:, None]
    suspected = (np.all(mass > 0, axis=0) & np.all(order < ATOM_ORDER, axis=0)
                 & (mass[-1] > Config.NEGATIVE_CLAMP))
    if np.any(suspected):
        where = float(z[np.argmax(suspected)])
        raise AtomSuspectedError(f"eps * Im U does not vanish as eps -> 0 at z = {where:.10g}", z=where)

    e1, e2 = eps[-2], eps[-1]
    density = raw[-1] - e2 * (raw[-2] - raw[-1]) / (e1 - e2)
    negative = density < 0
    worst = float(-density[negative].min()) if np.any(negative) else 0.0
    if worst > Config.NEGATIVE_CLAMP:
        where = float(z[np.argmin(density)])
        raise AtomSuspectedError(f"negative density {-worst:.3e} at z = {where:.10g}", z=where)
    if worst > 0:
        logger.debug(f"Clamped {int(negative.sum())} negative density values (max {worst:.2e})")
    density = np.where(negative, 0.0, density)
    diagnostics = PerronDiagnostics(eps=tuple(float(e) for e in eps), raw=raw, extrapolated=density,
                                    clamped=worst, clamped_count=int(negative.sum()))
    return SpectralMeasure(atom0=0.0, atoms=(), z=z, density=density, branch=branch, x=x,
                           diagnostics=diagnostics)


def _real_part(U: Callable, z: np.ndarray) -> np.ndarray:
    with np.errstate(all='ignore'):
        return np.real(np.asarray(U(-z.astype(complex)), dtype=complex))


def _scan_poles(U: Callable, lo: float, hi: float, n_scan: int, k_max: int) -> List[float]:
    """Zeros of 1/Re U(-z) on a grid uniform in sqrt(z).

    A zero of U also flips the sign of 1/U, but through infinity; such roots
    are rejected.
    """
    r = np.linspace(math.sqrt(lo), math.sqrt(hi), n_scan + 1)
    z = r * r
    with np.errstate(all='ignore'):
        g = 1.0 / _real_part(U, z)

    def recip(t):
        with np.errstate(all='ignore'):
            value = 1.0 / _real_part(U, np.array([t]))[0]
        return math.copysign(1e300, value) if np.isinf(value) else value

    poles = []
    for i in range(n_scan):
        if len(poles) >= k_max:
            break
        if g[i] == 0.0 and z[i] > 0 and (not poles or z[i] > poles[-1]):
            poles.append(float(z[i]))
            continue
        if not (np.isfinite(g[i]) and np.isfinite(g[i + 1])) or g[i] * g[i + 1] >= 0:
            continue
        try:
            root = optimize.brentq(recip, z[i], z[i + 1], xtol=1e-14, rtol=8.9e-16, maxiter=200)
        except (ValueError, RuntimeError) as e:
            logger.debug(f"No root of 1/U in ({z[i]:.6g}, {z[i + 1]:.6g}): {e}")
            continue
        if abs(recip(root)) <= 1e-6 * max(abs(g[i]), abs(g[i + 1])):
            poles.append(float(root))
        else:
            logger.debug(f"Sign change of 1/U at z = {root:.10g} is a zero of U")
    return poles


def _residue(U: Callable, sign: float, centre: float, radius: float) -> float:
    """Residue of +/-U at lambda = centre by the trapezoid rule on a circle."""
    theta = 2.0 * math.pi * np.arange(RESIDUE_POINTS) / RESIDUE_POINTS
    step = radius * np.exp(1j * theta)
    with np.errstate(all='ignore'):
        values = sign * np.asarray(U(centre + step), dtype=complex)
    return float(np.real(np.mean(values * step)))


def locate_atoms(U: Callable, branch: str, search_interval: Tuple[float, float], k_max: int,
                 n_scan: int = SCAN_POINTS) -> List[Tuple[float, float]]:
    """First k_max atoms (z_k, w_k) of sigma inside the search window."""
    lo, hi = (float(v) for v in search_interval)
    if not 0 <= lo < hi:
        raise DomainError(f"invalid search window ({lo}, {hi})")
    if k_max <= 0:
        return []
    sign = branch_sign(branch)
    poles = _scan_poles(U, lo, hi, n_scan, k_max)
    refined = _scan_poles(U, lo, hi, 2 * n_scan, k_max)
    if len(refined) > len(poles):
        raise RefineGridError(
            f"{len(refined) - len(poles)} more poles appear at doubled scan resolution in ({lo}, {hi})")
    masses = []
    for k, z_k in enumerate(poles):
        gaps = [z_k]
        if k > 0:
            gaps.append(z_k - poles[k - 1])
        if k + 1 < len(poles):
            gaps.append(poles[k + 1] - z_k)
        residue = _residue(U, sign, -z_k, 0.1 * min(gaps))
        masses.append(residue / (-2.0 * z_k))
    finite = [abs(w) for w in masses if np.isfinite(w)]
    floor = MASS_FLOOR * max(finite) if finite else math.inf
    atoms = []
    for z_k, mass in zip(poles, masses):
        if not np.isfinite(mass) or abs(mass) <= floor:
            logger.debug(f"Dropped root at z = {z_k:.10g} with residue mass {mass:.3e}")
            continue
        if mass < 0:
            raise InconsistentBranchError(f"pole at z = {z_k:.10g} carries mass {mass:.3e} <= 0")
        atoms.append((z_k, mass))
    logger.debug(f"Located {len(atoms)} atoms in ({lo:g}, {hi:g})")
    return atoms


def spectral_measure(U: Callable, branch: str, z_grid: Sequence[float], x: float = float('nan'),
                     atom_window: Optional[Tuple[float, float]] = None, k_max: int = 0,
                     eps_schedule: Optional[Sequence[float]] = None) -> SpectralMeasure:
    """sigma assembled from its atom at zero, its located atoms and its density."""
    atom0 = atom_at_zero(complex(np.asarray(U(np.array([0j])))[0]).real, branch)
    atoms = locate_atoms(U, branch, atom_window, k_max) if atom_window and k_max else []
    density = stieltjes_perron_invert(U, branch, z_grid, eps_schedule, atoms=atoms, atom0=atom0, x=x)
    measure = replace(density, atom0=atom0, atoms=tuple(atoms))
    measure.stieltjes_mass()
    logger.info(f"Spectral measure ({branch}, x={x:g}): atom0={atom0:.6g}, {len(atoms)} atoms, "
                f"{measure.z.size} density samples")
    return measure
