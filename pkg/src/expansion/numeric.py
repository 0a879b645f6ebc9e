"""Numeric expansion of a general environment on a working mesh.

Each level n carries E_n = e^{-2 W_n} (kept as a logarithm) and
u_n = E_n / A_n with A_n an antiderivative of E_n. The integration constant
is fixed by anchoring A_n at an endpoint of the interval:

    left anchor   A_n(x) =  integral of E_n from l to x     (u_n > 0)
    right anchor  A_n(x) = -integral of E_n from x to r     (u_n < 0)

Integrals are taken in a coordinate t in which the zoo integrands are
exponential near the endpoints, so tails beyond the mesh have closed form.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from src.cfrac import branch_sign
from src.errors import DomainError, NumericalFailureError, SignSelectionError
from src.expansion.chain import EnvironmentChain
from src.models.diffusion import DiffusionSpec
from src.models.functions import RealFunction

logger = logging.getLogger(__name__)

MAX_DEPTH = 20
MESH_STEP = 1e-3
MESH_PAD = 4.0
KAPPA_MIN = 0.05
KAPPA_DRIFT = 1e-2
TAIL_PROBE = 50


@dataclass(frozen=True)
class _Coordinate:
    """x(t) mapping the real line onto the interval."""
    l: float
    r: float

    def x_of(self, t):
        l, r = self.l, self.r
        if math.isinf(l) and math.isinf(r):
            return t
        if math.isinf(r):
            return l + np.exp(t)
        if math.isinf(l):
            return r - np.exp(-t)
        return l + (r - l) / (1.0 + np.exp(-t))

    def t_of(self, x):
        l, r = self.l, self.r
        x = np.asarray(x, dtype=float)
        if math.isinf(l) and math.isinf(r):
            return x
        if math.isinf(r):
            return np.log(x - l)
        if math.isinf(l):
            return -np.log(r - x)
        return np.log((x - l) / (r - x))

    def log_jacobian(self, t):
        """ln dx/dt"""
        l, r = self.l, self.r
        t = np.asarray(t, dtype=float)
        if math.isinf(l) and math.isinf(r):
            return np.zeros_like(t)
        if math.isinf(r):
            return t.copy()
        if math.isinf(l):
            return -t
        return math.log(r - l) - t - 2.0 * np.log1p(np.exp(-t))


def _tail(log_g: np.ndarray, dt: float, side: str) -> Optional[float]:
    """log of the integral of g beyond the mesh end, assuming g exponential in t.

    Returns None when g does not decay toward that end.
    """
    if side == 'left':
        edge = (log_g[1] - log_g[0]) / dt
        inner = (log_g[TAIL_PROBE + 1] - log_g[TAIL_PROBE]) / dt
        end = log_g[0]
    else:
        edge = (log_g[-2] - log_g[-1]) / dt
        inner = (log_g[-TAIL_PROBE - 2] - log_g[-TAIL_PROBE - 1]) / dt
        end = log_g[-1]
    if not (np.isfinite(edge) and np.isfinite(inner)) or edge < KAPPA_MIN:
        return None
    if abs(inner - edge) > KAPPA_DRIFT * abs(edge):
        logger.debug(f"{side} tail not exponential (rates {edge:.4g}, {inner:.4g}); treated as divergent")
        return None
    return end - math.log(edge)


class _Level:
    """Integrals of one E_n over the mesh."""

    def __init__(self, log_e: np.ndarray, coord: _Coordinate, t: np.ndarray, dt: float):
        self.log_e = log_e
        log_g = log_e + coord.log_jacobian(t)
        self.shift = float(np.max(log_g))
        g = np.exp(log_g - self.shift)
        cumulative = cumulative_simpson(g, dx=dt, initial=0.0)
        self.cumulative = cumulative  # scaled by e^{-shift}
        self.total = cumulative[-1]
        left = _tail(log_g, dt, 'left')
        right = _tail(log_g, dt, 'right')
        self.left_tail = None if left is None else math.exp(left - self.shift)
        self.right_tail = None if right is None else math.exp(right - self.shift)

    def antiderivative(self, anchor: str, t0_index: Optional[float] = None) -> Optional[np.ndarray]:
        """Scaled A_n on the mesh for the given anchor, None if it diverges."""
        if anchor == 'left':
            if self.left_tail is None:
                return None
            return self.left_tail + self.cumulative
        if anchor == 'right':
            if self.right_tail is None:
                return None
            return -(self.right_tail + self.total - self.cumulative)
        return self.cumulative - t0_index


def _single_signed(values: np.ndarray) -> bool:
    return bool(np.all(values > 0) or np.all(values < 0))


def expand_numeric(spec: DiffusionSpec, branch: str, depth: int, grid: Sequence[float],
                   mesh_step: float = MESH_STEP) -> EnvironmentChain:
    sign = branch_sign(branch)
    if depth < 0 or depth > MAX_DEPTH:
        raise DomainError(f"depth must lie in [0, {MAX_DEPTH}], got {depth}")
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0 or not spec.interior(grid):
        raise DomainError("grid must be nonempty and inside the interval interior")

    coord = _Coordinate(spec.l, spec.r)
    t_grid = coord.t_of(grid)
    t_lo = float(min(t_grid.min(), coord.t_of(spec.x0) if spec.interior(spec.x0) else t_grid.min())) - MESH_PAD
    t_hi = float(max(t_grid.max(), coord.t_of(spec.x0) if spec.interior(spec.x0) else t_grid.max())) + MESH_PAD
    n_mesh = int(math.ceil((t_hi - t_lo) / mesh_step)) + 1
    n_mesh += (n_mesh + 1) % 2  # odd point count for Simpson
    t = np.linspace(t_lo, t_hi, n_mesh)
    dt = float(t[1] - t[0])
    x = coord.x_of(t)
    inside = (t >= t_grid.min() - dt) & (t <= t_grid.max() + dt)
    with np.errstate(over='raise', invalid='raise'):
        try:
            a = np.asarray(spec.a(x), dtype=float) + 0.0 * x
            log_a = np.log(a)
            if spec.w_potential is not None:
                w = np.asarray(spec.w_potential(x), dtype=float) + 0.0 * x
            else:
                wp = np.asarray(spec.wprime(x), dtype=float) * np.exp(coord.log_jacobian(t))
                w = cumulative_simpson(wp, dx=dt, initial=0.0)
                w = w - np.interp(coord.t_of(spec.x0), t, w) if spec.interior(spec.x0) else w
        except FloatingPointError as e:
            raise NumericalFailureError(f"environment not evaluable on the mesh: {e}")

    def t0_offset(level: _Level) -> float:
        t_ref = coord.t_of(spec.x0) if spec.interior(spec.x0) else t[0]
        return float(np.interp(t_ref, t, level.cumulative))

    log_e = -2.0 * w
    log_abs_u: List[np.ndarray] = []
    u_signs: List[float] = []
    anchors: List[str] = []
    for n in range(depth + 1):
        level = _Level(log_e, coord, t, dt)
        preferred = 'left' if sign > 0 else 'right'
        if n == 0:
            candidates = [preferred]
        else:
            candidates = [preferred, 'right' if preferred == 'left' else 'left', 'x0']
        chosen: Optional[Tuple[str, np.ndarray]] = None
        for anchor in candidates:
            scaled = level.antiderivative(anchor, t0_offset(level))
            if scaled is None or not np.all(np.isfinite(scaled)):
                continue
            if _single_signed(scaled[inside]) and np.all(scaled != 0):
                chosen = (anchor, scaled)
                break
        if chosen is None and n == 0:
            # phi(., 0) is constant: the trivial solution
            anchors.append('trivial')
            log_abs_u.append(np.full_like(t, -np.inf))
            u_signs.append(0.0)
            log_e = -log_a - log_e
            continue
        if chosen is None:
            raise SignSelectionError(f"no single-signed integration constant at level {n}", level=n)
        anchor, scaled = chosen
        if anchor == 'x0':
            logger.warning(f"level {n}: anchored at x0, u_{n} single-signed on the grid only")
        log_abs_a = np.log(np.abs(scaled)) + level.shift
        anchors.append(anchor)
        log_abs_u.append(log_e - log_abs_a)
        u_signs.append(1.0 if scaled[0] > 0 else -1.0)
        logger.debug(f"level {n}: anchor {anchor}, sign {u_signs[-1]:+g}")
        log_e = 2.0 * log_abs_a - log_a - log_e

    us = [_spline_function(coord, t, la, s, f"u_{n}") for n, (la, s) in enumerate(zip(log_abs_u, u_signs))]
    wprimes = [spec.wprime]
    for n in range(1, depth + 1):
        wprimes.append(_recurrence(spec, wprimes[-1], us[n - 1], n))
    return EnvironmentChain(spec=spec, wprimes=tuple(wprimes), us=tuple(us), branch=branch,
                            anchors=tuple(anchors))


def _spline_function(coord: _Coordinate, t: np.ndarray, log_abs: np.ndarray, sign: float,
                     label: str) -> RealFunction:
    if sign == 0.0:
        zero = lambda x: 0.0 * np.asarray(x, dtype=float)
        return RealFunction(eval=zero, deriv=zero, label=label)
    spline = CubicSpline(t, log_abs)
    slope = spline.derivative()

    def value(x):
        return sign * np.exp(spline(coord.t_of(x)))

    def deriv(x):
        tx = coord.t_of(x)
        dxdt = np.exp(coord.log_jacobian(tx))
        return sign * np.exp(spline(tx)) * slope(tx) / dxdt

    return RealFunction(eval=value, deriv=deriv, label=label)


def _recurrence(spec: DiffusionSpec, w_prev: RealFunction, u_prev: RealFunction, n: int) -> RealFunction:
    """W_n' = a'/(2a) - u_{n-1} - W_{n-1}'"""
    a = spec.a

    def value(x):
        return a.derivative(x) / (2.0 * a(x)) - u_prev(x) - w_prev(x)

    return RealFunction(eval=value, label=f"W_{n}'")
