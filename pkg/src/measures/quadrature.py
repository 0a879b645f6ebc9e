"""Grid quadrature with power-law end corrections.

Measures are stored as samples on caller-supplied grids; integrals over the
represented part use Simpson's rule, and the parts beyond the grid ends are
estimated from a power law fitted to the outermost samples.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

logger = logging.getLogger(__name__)

FIT_SPAN = 20  # fit against the sample n // FIT_SPAN points inside the end


@dataclass(frozen=True)
class PowerLaw:
    """f(x) ~ coef * x**exponent beyond `edge`."""
    coef: float
    exponent: float
    edge: float

    def __call__(self, x):
        return self.coef * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(x: np.ndarray, f: np.ndarray, side: str = 'right') -> Optional[PowerLaw]:
    """Power law through the end sample and one a little inside; None if f is not positive there."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    n = x.size
    if n < 3:
        return None
    k = max(1, n // FIT_SPAN)
    i_end, i_in = (n - 1, n - 1 - k) if side == 'right' else (0, k)
    x_end, x_in, f_end, f_in = x[i_end], x[i_in], f[i_end], f[i_in]
    if not (x_end > 0 and x_in > 0 and f_end > 0 and f_in > 0):
        return None
    exponent = math.log(f_end / f_in) / math.log(x_end / x_in)
    return PowerLaw(coef=f_end / x_end ** exponent, exponent=exponent, edge=x_end)


def head_integral(law: Optional[PowerLaw]) -> float:
    """Integral of the law over (0, edge)."""
    if law is None:
        return 0.0
    if law.exponent <= -1.0:
        return math.inf
    return float(law(law.edge)) * law.edge / (law.exponent + 1.0)


def tail_integral(law: Optional[PowerLaw]) -> float:
    """Integral of the law over (edge, inf)."""
    if law is None:
        return 0.0
    if law.exponent >= -1.0:
        return math.inf
    return -float(law(law.edge)) * law.edge / (law.exponent + 1.0)


def integrate_samples(x: Sequence[float], f: Sequence[float], head: bool = False,
                      tail: bool = False) -> Tuple[float, float, float]:
    """(grid part, head correction, tail correction) of the integral of f."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.size < 2:
        return 0.0, 0.0, 0.0
    core = float(integrate.simpson(f, x=x))
    head_part = head_integral(fit_power_law(x, f, 'left')) if head else 0.0
    tail_part = tail_integral(fit_power_law(x, f, 'right')) if tail else 0.0
    return core, head_part, tail_part


def laplace_tail(law: Optional[PowerLaw], y: float) -> float:
    """Integral over (edge, inf) of z * law(z) * exp(-y z)."""
    if law is None:
        return 0.0
    s = law.exponent + 2.0
    if s > 0:
        # upper incomplete gamma
        return float(law.coef * y ** (-s) * special.gammaincc(s, y * law.edge) * special.gamma(s))
    value, _ = integrate.quad(lambda z: z * law(z) * math.exp(-y * z), law.edge, np.inf)
    return value


@dataclass(frozen=True)
class AtomLaw:
    """Atoms beyond the K located ones, modelled as z_k = coef * k**exponent with a fixed mass.

    Sums over k > K are read as integrals from K + 1/2 plus the first
    Euler-Maclaurin midpoint correction f'(K + 1/2)/24.
    """
    coef: float
    exponent: float
    mass: float
    count: int

    @property
    def start(self) -> float:
        return self.count + 0.5

    def _location(self) -> Tuple[float, float]:
        """(z, dz/dk) at the start of the unseen atoms."""
        k = self.start
        return self.coef * k ** self.exponent, self.coef * self.exponent * k ** (self.exponent - 1.0)

    def stieltjes(self, lam: float) -> float:
        """Sum over unseen atoms of lam * w / (lam + z_k)."""
        value, _ = integrate.quad(lambda k: lam * self.mass / (lam + self.coef * k ** self.exponent),
                                  self.start, np.inf)
        z, dz = self._location()
        return value - lam * self.mass * dz / (lam + z) ** 2 / 24.0

    def laplace(self, y: float) -> float:
        """Sum over unseen atoms of z_k * w * exp(-y z_k)."""
        s = 1.0 + 1.0 / self.exponent
        v = y * self.coef * self.start ** self.exponent
        value = (self.mass / (self.exponent * y) * (y * self.coef) ** (-1.0 / self.exponent)
                 * special.gammaincc(s, v) * special.gamma(s))
        z, dz = self._location()
        return float(value + self.mass * (1.0 - y * z) * math.exp(-y * z) * dz / 24.0)

    def negative_moment(self, n: int) -> float:
        """Sum over unseen atoms of w / z_k**n."""
        power = self.exponent * n - 1.0
        if power <= 0:
            return math.inf
        z, dz = self._location()
        value = self.mass * self.coef ** (-n) * self.start ** (-power) / power
        return value - n * self.mass * z ** (-n - 1.0) * dz / 24.0


def fit_atom_law(atoms: Sequence[Tuple[float, float]]) -> Optional[AtomLaw]:
    """Growth law of the atom locations from the last two of the first K atoms."""
    if len(atoms) < 3:
        return None
    k = len(atoms)
    z_prev, z_last = atoms[-2][0], atoms[-1][0]
    exponent = math.log(z_last / z_prev) / math.log(k / (k - 1.0))
    if exponent <= 1.0:
        logger.warning(f"atom locations grow like k^{exponent:.3f}; tail sums are not summable")
        return None
    return AtomLaw(coef=z_last / k ** exponent, exponent=exponent, mass=atoms[-1][1], count=k)
