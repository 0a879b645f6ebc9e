"""Diffusion paths: first hitting times and occupation times below a level.

Blocks of paths are advanced in chunks of steps. Paths leave the active set
as soon as they are resolved (hit, escaped for good, killed), so the cost is
proportional to the simulated lifetime rather than to the horizon.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from config.config import Config
from src.errors import DomainError, HorizonTooShortError, PreconditionError, ValidationError
from src.models.diffusion import BoundaryBehavior, DiffusionSpec, scale_density, scale_limit, spec_to_json
from src.models.zoo import BESSEL, BROWNIAN_DRIFT, ZooModel, identify_zoo, zoo_riccati
from src.sim.pool import SamplePool
from src.sim.rng import block_rng, generator_id, map_blocks

logger = logging.getLogger(__name__)

ABSORB = "absorb"
REFLECT_FOLD = "reflect-fold"
CHUNK = 256
HITTING_CENSOR_LIMIT = 0.5
OCCUPATION_CENSOR_LIMIT = 0.01


@dataclass(frozen=True)
class PathConfig:
    spec: DiffusionSpec
    horizon: float = Config.PATH_HORIZON
    step: float = Config.PATH_STEP
    n_paths: int = 10_000
    seed: int = Config.DEFAULT_SEED
    boundary_rule: str = ABSORB
    antithetic: bool = False
    block: int = Config.PATH_BLOCK

    def __post_init__(self):
        if not self.horizon > 0 or not 0 < self.step <= self.horizon / 1e3:
            raise ValidationError(f"step {self.step} must be positive and <= horizon/1000")
        if self.n_paths < 1 or self.block < 1:
            raise ValidationError("n_paths and block must be positive")
        if self.boundary_rule not in (ABSORB, REFLECT_FOLD):
            raise ValidationError(f"boundary_rule must be {ABSORB!r} or {REFLECT_FOLD!r}")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.step))

    def to_json(self):
        return {'spec': spec_to_json(self.spec), 'horizon': self.horizon, 'step': self.step,
                'n_paths': self.n_paths, 'seed': self.seed, 'boundary_rule': self.boundary_rule,
                'antithetic': self.antithetic, 'block': self.block}


# Engines

class _Engine:
    """State of the active paths of one block."""
    dim = 1

    def __init__(self, spec: DiffusionSpec, step: float, start: np.ndarray):
        self.spec = spec
        self.step = step
        self.x = np.asarray(start, dtype=float).copy()

    def advance(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def keep(self, mask: np.ndarray) -> None:
        self.x = self.x[mask]

    def set_position(self, mask: np.ndarray, value: float) -> None:
        self.x[mask] = value


class _BrownianEngine(_Engine):
    """Exact increments of mu t + B_t."""

    def __init__(self, spec, step, start, mu: float):
        super().__init__(spec, step, start)
        self.mu = mu

    def advance(self, z):
        path = self.x + np.cumsum(self.mu * self.step + math.sqrt(self.step) * z[..., 0], axis=0)
        self.x = path[-1].copy()
        return path


class _BesselEngine(_Engine):
    """Norm of a Brownian motion in `dim` dimensions."""

    def __init__(self, spec, step, start, dim: int):
        super().__init__(spec, step, start)
        self.dim = dim
        self.vec = np.zeros((self.x.size, dim))
        self.vec[:, 0] = self.x

    def advance(self, z):
        walk = self.vec + np.cumsum(math.sqrt(self.step) * z, axis=0)
        self.vec = walk[-1].copy()
        path = np.linalg.norm(walk, axis=-1)
        self.x = path[-1].copy()
        return path

    def keep(self, mask):
        super().keep(mask)
        self.vec = self.vec[mask]

    def set_position(self, mask, value):
        super().set_position(mask, value)
        self.vec[mask] = 0.0
        self.vec[mask, 0] = value


class _EulerEngine(_Engine):
    """Euler-Maruyama for dX = a W' dt + sqrt(a) dB.

    Killing endpoints absorb (the path becomes NaN); every other finite
    endpoint folds the overshoot back into the interval.
    """

    def __init__(self, spec, step, start):
        super().__init__(spec, step, start)
        # the drift may be singular on an entrance endpoint
        inside = math.sqrt(step)
        if math.isfinite(spec.l):
            self.x = np.where(self.x <= spec.l, spec.l + inside, self.x)
        if math.isfinite(spec.r):
            self.x = np.where(self.x >= spec.r, spec.r - inside, self.x)

    def _boundary(self, x):
        spec = self.spec
        for side, end in (('left', spec.l), ('right', spec.r)):
            if not math.isfinite(end):
                continue
            out = x <= end if side == 'left' else x >= end
            if not np.any(out):
                continue
            if spec.boundary(side) == BoundaryBehavior.KILLING:
                x = np.where(out, np.nan, x)
            else:
                x = np.where(out, 2.0 * end - x, x)
        return x

    def advance(self, z):
        k = z.shape[0]
        path = np.empty((k, self.x.size))
        x = self.x
        root = math.sqrt(self.step)
        with np.errstate(invalid='ignore', divide='ignore', over='ignore'):
            for j in range(k):
                a = np.asarray(self.spec.a(x), dtype=float)
                x = x + self.spec.drift(x) * self.step + np.sqrt(np.abs(a)) * root * z[j, :, 0]
                x = self._boundary(x)
                path[j] = x
        self.x = x.copy()
        return path


def _bessel_dimension(model: ZooModel) -> Optional[int]:
    dim = 2.0 * model.p + 2.0
    if dim < 1 or abs(dim - round(dim)) > 1e-12 or model.zero_boundary == BoundaryBehavior.KILLING:
        return None
    return int(round(dim))


def _engine(spec: DiffusionSpec, step: float, start: np.ndarray) -> _Engine:
    model = identify_zoo(spec)
    if model is not None and model.family == BROWNIAN_DRIFT:
        return _BrownianEngine(spec, step, start, model.mu)
    if model is not None and model.family == BESSEL:
        dim = _bessel_dimension(model)
        if dim is not None:
            return _BesselEngine(spec, step, start, dim)
    return _EulerEngine(spec, step, start)


def _normals(rng: np.random.Generator, k: int, m: int, dim: int, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return rng.standard_normal((k, m, dim))
    half = rng.standard_normal((k, (m + 1) // 2, dim))
    return np.concatenate([half, -half], axis=1)[:, :m]


def _first(mask: np.ndarray) -> np.ndarray:
    """Index of the first True per column, or the column length when none."""
    return np.where(mask.any(axis=0), mask.argmax(axis=0), mask.shape[0])


def _start_point(spec: DiffusionSpec, start: float) -> float:
    if spec.l < start < spec.r:
        return start
    if start == spec.l and spec.left != BoundaryBehavior.KILLING:
        return start
    if start == spec.r and spec.right != BoundaryBehavior.KILLING:
        return start
    raise DomainError(f"start {start} outside the state space ({spec.l}, {spec.r})")


# Return probabilities from the scale function

def _scale_mass(spec: DiffusionSpec, lo: float, hi: float) -> float:
    value, _ = integrate.quad(lambda y: scale_density(spec, y), lo, hi, epsabs=0.0,
                              epsrel=Config.QUAD_REL_TOL, limit=Config.QUAD_LIMIT)
    return value


def _returns_surely(spec: DiffusionSpec, side: str) -> bool:
    return spec.boundary(side) == BoundaryBehavior.REFLECTING or math.isinf(scale_limit(spec, side))


def _tail_ratio(spec: DiffusionSpec, x: float, level: float, side: str) -> float:
    end = spec.endpoint(side)
    if side == 'right':
        return _scale_mass(spec, x, end) / _scale_mass(spec, level, end)
    return _scale_mass(spec, end, x) / _scale_mass(spec, end, level)


def return_probability(spec: DiffusionSpec, x: float, level: float) -> float:
    """P_x(the path ever reaches `level`), from the scale function."""
    if x == level:
        return 1.0
    side = 'right' if x > level else 'left'
    if _returns_surely(spec, side):
        return 1.0
    return _tail_ratio(spec, x, level, side)


def escape_level(spec: DiffusionSpec, level: float, side: str, prob: float) -> Optional[float]:
    """Point on `side` of `level` from which `level` is reached with probability `prob`.

    None when the path returns almost surely from that side.
    """
    if _returns_surely(spec, side):
        return None
    end = spec.endpoint(side)
    direction = 1.0 if side == 'right' else -1.0
    target = math.log(prob)

    def gap(x):
        return math.log(_tail_ratio(spec, x, level, side)) - target

    far = None
    for k in range(Config.MAX_TRUNCATIONS):
        if math.isfinite(end):
            candidate = end - (end - level) * 2.0 ** (-(k + 1))
        else:
            candidate = level + direction * 2.0 ** k * max(1.0, abs(level))
        try:
            if gap(candidate) < 0:
                far = candidate
                break
        except (ValueError, ZeroDivisionError, OverflowError):
            break
    if far is None:
        logger.debug(f"no escape level on the {side} of {level} for p={prob:g}")
        return None
    near = level + direction * 1e-12 * max(1.0, abs(level))
    found = optimize.brentq(gap, min(near, far), max(near, far), xtol=1e-10, rtol=1e-12)
    logger.debug(f"Escape level {found:.6g} on the {side} of {level} (return prob {prob:g})")
    return found


# Hitting times

def _hitting_block(cfg: PathConfig, start: float, target: float, escape: Optional[float],
                   block: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = block_rng(cfg.seed, block)
    values = np.full(m, np.inf)
    censored = np.zeros(m, dtype=bool)
    if start == target:
        return np.zeros(m), censored
    direction = 1.0 if target > start else -1.0
    engine = _engine(cfg.spec, cfg.step, np.full(m, start))
    active = np.arange(m)
    dt = cfg.step
    a_target = float(cfg.spec.a(target))
    done = 0
    while active.size and done < cfg.n_steps:
        k = min(CHUNK, cfg.n_steps - done)
        z = _normals(rng, k, active.size, engine.dim, cfg.antithetic)
        prev_end = engine.x.copy()
        path = engine.advance(z)
        prev = np.vstack([prev_end[None, :], path[:-1]])
        with np.errstate(invalid='ignore', over='ignore'):
            crossed = (path - target) * direction >= 0
            hit = crossed.copy()
            if cfg.boundary_rule == ABSORB:
                u = rng.random((k, active.size))
                bridge = np.exp(-2.0 * (target - prev) * (target - path) / (a_target * dt))
                hit |= ~crossed & (u < bridge)
            dead = np.isnan(path)
            escaped = (path - escape) * direction <= 0 if escape is not None else np.zeros_like(hit)
        j_hit, j_dead, j_escape = _first(hit), _first(dead), _first(escaped)
        j_gone = np.minimum(j_dead, j_escape)
        resolved = (j_hit < k) | (j_gone < k)
        by_hit = resolved & (j_hit <= j_gone)
        idx = np.flatnonzero(by_hit)
        if idx.size:
            j = j_hit[idx]
            x0, x1 = prev[j, idx], path[j, idx]
            with np.errstate(invalid='ignore', divide='ignore'):
                frac = np.where(crossed[j, idx], (target - x0) / (x1 - x0), 0.5)
            values[active[idx]] = (done + j + np.clip(frac, 0.0, 1.0)) * dt
        # escaped and killed paths keep +inf
        engine.keep(~resolved)
        active = active[~resolved]
        done += k
    censored[active] = True
    values[active] = cfg.horizon
    return values, censored


def hitting_time(cfg: PathConfig, start: float, target: float, threads: Optional[int] = None) -> SamplePool:
    """First passage times of `target`; +inf for paths that never get there."""
    spec = cfg.spec
    start = _start_point(spec, float(start))
    if not (spec.l <= target <= spec.r):
        raise DomainError(f"target {target} outside ({spec.l}, {spec.r})")
    escape = None
    if target != start:
        side = 'left' if target > start else 'right'
        escape = escape_level(spec, target, side, Config.NEVER_RETURN_PROB)
    parts = map_blocks(lambda block, lo, hi: _hitting_block(cfg, start, target, escape, block, hi - lo),
                       cfg.n_paths, cfg.block, threads)
    values = np.concatenate([p[0] for p in parts])
    censored = np.concatenate([p[1] for p in parts])
    pool = SamplePool(tag='hitting_time', values=values, seed=cfg.seed, generator_id=generator_id(cfg.seed),
                      censored=censored,
                      meta={'config': dict(cfg.to_json(), start=start, target=target), 'escape_level': escape})
    logger.info(f"Simulated {pool.n} hitting times of {target:g} from {start:g} "
                f"({pool.censored_fraction:.2%} censored)")
    if pool.censored_fraction > HITTING_CENSOR_LIMIT:
        raise HorizonTooShortError(f"{pool.censored_fraction:.1%} of paths unresolved at horizon {cfg.horizon}",
                                   censored_fraction=pool.censored_fraction)
    return pool


# Occupation times

def _occupation_block(cfg: PathConfig, start: float, level: float, escape: float, q: float,
                      block: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = block_rng(cfg.seed, block)
    occupation = np.zeros(m)
    censored = np.zeros(m, dtype=bool)
    engine = _engine(cfg.spec, cfg.step, np.full(m, start))
    active = np.arange(m)
    dt = cfg.step

    def settle(mask):
        """Escaped paths come back to `level` with probability q, otherwise they are done."""
        back = rng.random(mask.size) < q
        engine.set_position(mask & back, level)
        return mask & ~back

    finished = settle(engine.x >= escape)
    engine.keep(~finished)
    active = active[~finished]
    done = 0
    while active.size and done < cfg.n_steps:
        k = min(CHUNK, cfg.n_steps - done)
        z = _normals(rng, k, active.size, engine.dim, cfg.antithetic)
        path = engine.advance(z)
        with np.errstate(invalid='ignore'):
            j_escape = _first(path >= escape)
        j_dead = _first(np.isnan(path))
        stop = np.minimum(j_escape, j_dead)
        steps = np.arange(k)[:, None]
        with np.errstate(invalid='ignore'):
            below = (path <= level) & (steps < stop[None, :])
        occupation[active] += dt * below.sum(axis=0)
        finished = j_dead < j_escape
        escaped = (j_escape < k) & ~finished
        finished |= settle(escaped)
        engine.keep(~finished)
        active = active[~finished]
        done += k
    censored[active] = True
    return occupation, censored


def occupation_below(cfg: PathConfig, level: float, start: Optional[float] = None,
                     threads: Optional[int] = None) -> SamplePool:
    """Total time spent at or below `level` over the lifetime of a right-transient path."""
    spec = cfg.spec
    start = _start_point(spec, spec.x0 if start is None else float(start))
    if math.isinf(scale_limit(spec, 'right')) or spec.right == BoundaryBehavior.REFLECTING:
        raise PreconditionError(f"{spec.label or 'spec'} is not transient to the right", endpoint='right')
    config = dict(cfg.to_json(), start=start, level=level)
    if level <= spec.l:
        return SamplePool(tag='occupation_below', values=np.zeros(cfg.n_paths), seed=cfg.seed,
                          generator_id=generator_id(cfg.seed), censored=np.zeros(cfg.n_paths, dtype=bool),
                          meta={'config': config})
    q = Config.ESCAPE_RETURN_PROB
    escape = escape_level(spec, level, 'right', q)
    if escape is None:
        raise PreconditionError(f"no escape level above {level:g}: the path returns almost surely",
                                endpoint='right')
    parts = map_blocks(lambda block, lo, hi: _occupation_block(cfg, start, level, escape, q, block, hi - lo),
                       cfg.n_paths, cfg.block, threads)
    values = np.concatenate([p[0] for p in parts])
    censored = np.concatenate([p[1] for p in parts])
    pool = SamplePool(tag='occupation_below', values=values, seed=cfg.seed,
                      generator_id=generator_id(cfg.seed), censored=censored,
                      meta={'config': config, 'escape_level': escape})
    logger.info(f"Simulated {pool.n} occupation times below {level:g} from {start:g} "
                f"({pool.censored_fraction:.2%} censored)")
    if pool.censored_fraction > OCCUPATION_CENSOR_LIMIT:
        raise HorizonTooShortError(f"{pool.censored_fraction:.1%} of paths still alive at horizon {cfg.horizon}",
                                   censored_fraction=pool.censored_fraction)
    return pool


# Laplace transforms

def laplace_estimate(pool: SamplePool, lam: float) -> Tuple[float, float]:
    """Sample mean of exp(-lambda H) and its standard error."""
    with np.errstate(over='ignore'):
        weights = np.exp(-lam * pool.values)
    return float(weights.mean()), float(weights.std(ddof=1) / math.sqrt(weights.size))


def laplace_closed_form(spec: DiffusionSpec, start: float, target: float, lam: float) -> float:
    """E_x[exp(-lambda H(y))] = phi(x)/phi(y) for a zoo spec."""
    model = identify_zoo(spec)
    if model is None:
        raise ValidationError("closed-form hitting transform needs a Brownian-drift or Bessel spec")
    if start == target:
        return 1.0
    branch = 'minus' if target > start else 'plus'
    value, _ = integrate.quad(lambda x: float(zoo_riccati(model, branch, x, lam)), min(start, target),
                              max(start, target), limit=Config.QUAD_LIMIT)
    return math.exp(-value) if branch == 'minus' else math.exp(value)
