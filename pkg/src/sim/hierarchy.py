"""Coefficient hierarchy and Riccati variable in a Brownian environment with drift.

With W(x) = mu x + B_x, the coefficients u_i and the Riccati variable U solve
Stratonovich equations in x driven by the same B. In v = ln u the noise is
additive, so Euler-Maruyama in v keeps every u_i positive.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from config.config import Config
from src.errors import BlowUpError, DomainError, ValidationError
from src.sim.pool import SamplePool, config_hash
from src.sim.rng import block_rng, generator_id, map_blocks

logger = logging.getLogger(__name__)

MAX_DEPTH = 8
LOG_LIMIT = 700.0
CHUNK = 1024


@dataclass(frozen=True)
class SDEConfig:
    mu: float
    depth: int = 1
    step: float = Config.SDE_STEP
    burn_in: float = Config.SDE_BURN_IN
    n_samples: int = 10_000
    thin: float = Config.SDE_THIN
    seed: int = Config.DEFAULT_SEED
    chains: int = Config.SDE_CHAINS
    chains_per_block: int = Config.SDE_CHAINS

    def __post_init__(self):
        if not self.mu > 0:
            raise ValidationError(f"environment drift must be positive, got {self.mu}")
        if self.depth < 1:
            raise ValidationError(f"depth must be >= 1, got {self.depth}")
        if not 0 < self.step <= self.thin / 10.0:
            raise ValidationError(f"step {self.step} must be positive and <= thin/10 = {self.thin / 10.0}")
        if self.burn_in < 100.0 * max(1.0, 1.0 / self.mu):
            raise ValidationError(f"burn_in {self.burn_in} shorter than 100 max(1, 1/mu)")
        if self.n_samples < 1 or self.chains < 1 or self.chains_per_block < 1:
            raise ValidationError("n_samples, chains and chains_per_block must be positive")

    @property
    def per_chain(self) -> int:
        return -(-self.n_samples // self.chains)

    def to_json(self) -> Dict:
        return asdict(self)


def _integrate_chains(cfg: SDEConfig, drift: Callable, noise: np.ndarray, v0: np.ndarray,
                      block: int, n_chains: int) -> np.ndarray:
    """Euler-Maruyama for dv = drift(v) dx + noise dB; retained samples of exp(v)."""
    rng = block_rng(cfg.seed, block)
    burn = int(round(cfg.burn_in / cfg.step))
    thin = int(round(cfg.thin / cfg.step))
    keep = cfg.per_chain
    total = burn + keep * thin
    v = np.tile(v0, (n_chains, 1))
    out = np.empty((keep, n_chains, v0.size))
    scale = math.sqrt(cfg.step) * noise
    done = 0
    taken = 0
    while done < total:
        k = min(CHUNK, total - done)
        dB = rng.standard_normal((k, n_chains))
        with np.errstate(over='ignore', invalid='ignore'):
            for j in range(k):
                v += drift(v) * cfg.step + dB[j][:, None] * scale
                done += 1
                if done > burn and (done - burn) % thin == 0:
                    out[taken] = np.exp(v)
                    taken += 1
        bad = ~np.isfinite(v) | (np.abs(v) > LOG_LIMIT)
        if np.any(bad):
            x = done * cfg.step
            raise BlowUpError(f"log-coordinate overflow near x = {x:.6g}; reduce the step", x=x)
    return out.reshape(keep * n_chains, v0.size)


def _run(cfg: SDEConfig, drift: Callable, noise: np.ndarray, v0: np.ndarray, threads: Optional[int]):
    parts = map_blocks(lambda block, start, stop: _integrate_chains(cfg, drift, noise, v0, block, stop - start),
                       cfg.chains, cfg.chains_per_block, threads)
    # sample-major within each block, blocks in order
    return np.concatenate(parts, axis=0)[:cfg.n_samples]


def _hierarchy_drift(mu: float, depth: int) -> Callable:
    signs = (-1.0) ** np.arange(depth)

    def drift(v):
        u = np.exp(v)
        alternating = -signs * u
        below = np.cumsum(alternating, axis=1) - alternating
        return 2.0 * signs * (mu + below) - u

    return drift


def simulate_hierarchy(cfg: SDEConfig, threads: Optional[int] = None) -> SamplePool:
    """Stationary joint samples of (u_1, ..., u_d), all levels driven by the same dB."""
    if cfg.depth > MAX_DEPTH:
        raise ValidationError(f"hierarchy depth {cfg.depth} above {MAX_DEPTH}")
    signs = (-1.0) ** np.arange(cfg.depth)
    v0 = np.full(cfg.depth, math.log(2.0 * cfg.mu))
    values = _run(cfg, _hierarchy_drift(cfg.mu, cfg.depth), 2.0 * signs, v0, threads)
    logger.info(f"Sampled {values.shape[0]} hierarchy states (mu={cfg.mu:g}, depth={cfg.depth})")
    meta = {'config': cfg.to_json(), 'target': f"Gamma(shape={cfg.mu:g}, scale=2) per coordinate"}
    return SamplePool(tag='hierarchy', values=values, seed=cfg.seed, generator_id=generator_id(cfg.seed),
                      meta=meta)


def simulate_U(cfg: SDEConfig, lam: float, threads: Optional[int] = None) -> SamplePool:
    """Stationary samples of U from dU = (2 lambda - 2 mu U - U^2) dx - 2 U o dB."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    mu = cfg.mu

    def drift(v):
        return 2.0 * lam * np.exp(-v) - 2.0 * mu - np.exp(v)

    v0 = np.array([math.log(float(gig_law(mu, lam).median()))])
    values = _run(cfg, drift, np.array([-2.0]), v0, threads)[:, 0]
    logger.info(f"Sampled {values.size} Riccati values (mu={mu:g}, lambda={lam:g})")
    config = dict(cfg.to_json(), lam=lam)
    return SamplePool(tag='riccati', values=values, seed=cfg.seed, generator_id=generator_id(cfg.seed),
                      meta={'config': config, 'target': f"GIG(p={-mu:g}, lambda={lam:g})"})


def sample_random_cfrac(mu: float, lam: float, depth: int, n_samples: int, seed: int,
                        block: int = Config.PATH_BLOCK, threads: Optional[int] = None) -> SamplePool:
    """2 lambda/(u_1 + 2 lambda/(u_2 + ...)) with iid Gamma(mu, scale 2) coefficients."""
    if not mu > 0 or not lam > 0 or depth < 1 or n_samples < 1:
        raise ValidationError("random fraction needs mu > 0, lambda > 0, depth >= 1, n_samples >= 1")

    def run(index, start, stop):
        u = block_rng(seed, index).gamma(mu, 2.0, size=(depth, stop - start))
        tail = u[-1]
        for level in range(depth - 2, -1, -1):
            tail = u[level] + 2.0 * lam / tail
        return 2.0 * lam / tail

    values = np.concatenate(map_blocks(run, n_samples, block, threads))
    config = {'mu': mu, 'lam': lam, 'depth': depth, 'n_samples': n_samples, 'seed': seed}
    return SamplePool(tag='random_cfrac', values=values, seed=seed, generator_id=generator_id(seed),
                      meta={'config': config, 'target': f"GIG(p={-mu:g}, lambda={lam:g})"})


# Stationary laws

def gamma_law(mu: float):
    return stats.gamma(a=mu, scale=2.0)


def gig_law(mu: float, lam: float):
    """Density proportional to y^(-mu-1) exp(-y/2 - lambda/y)."""
    c = math.sqrt(2.0 * lam)
    return stats.geninvgauss(p=-mu, b=c, scale=c)


def _gig_kernel(mu: float, lam: float) -> Callable[[float], float]:
    return lambda y: math.exp(-(mu + 1.0) * math.log(y) - y / 2.0 - lam / y) if y > 0 else 0.0


def gig_normalization(mu: float, lam: float) -> float:
    value, _ = integrate.quad(_gig_kernel(mu, lam), 0.0, np.inf, epsabs=0.0,
                              epsrel=Config.QUAD_REL_TOL, limit=Config.QUAD_LIMIT)
    return value


def gig_cdf_quadrature(mu: float, lam: float) -> Callable:
    """CDF of the stationary law of U, normalized by adaptive quadrature."""
    kernel = _gig_kernel(mu, lam)
    norm = gig_normalization(mu, lam)

    def cdf(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = [integrate.quad(kernel, 0.0, t, limit=Config.QUAD_LIMIT)[0] / norm if t > 0 else 0.0
               for t in y]
        return np.asarray(out)

    return cdf


def gig_reciprocal_mean(mu: float, lam: float) -> float:
    """E[1/U] under the stationary law."""
    kernel = _gig_kernel(mu, lam)
    value, _ = integrate.quad(lambda y: kernel(y) / y, 0.0, np.inf, limit=Config.QUAD_LIMIT)
    return value / gig_normalization(mu, lam)


def fokker_planck_residual(mu: float, depth: int = 2, grid: Optional[Sequence[float]] = None,
                           h: float = 1e-3) -> float:
    """Max |sum_i d_i J_i| for the product gamma density, relative to the flux derivatives.

    J_i = -a_i f + 2(-1)^(i-1) y_i sum_j (-1)^(j-1) d_j(y_j f), with the inner
    derivative d_j(y_j f) = (mu - y_j/2) f taken exactly and the outer one by
    a five-point stencil. The drift and noise parts of J_i are differentiated
    separately and the residual is measured against the sum of their sizes,
    so that a flux vanishing identically (depth 1) reads as zero.
    """
    if depth < 1 or depth > MAX_DEPTH:
        raise ValidationError(f"depth must be in [1, {MAX_DEPTH}]")
    axis = np.linspace(0.2, 8.0, 25) if grid is None else np.asarray(grid, dtype=float)
    points = np.stack(np.meshgrid(*([axis] * depth), indexing='ij'), axis=-1).reshape(-1, depth)
    signs = (-1.0) ** np.arange(depth)
    law = gamma_law(mu)

    def fluxes(y, i):
        f = np.prod(law.pdf(y), axis=-1)
        alternating = -signs * y
        below = np.cumsum(alternating, axis=-1) - alternating
        a = 2.0 * signs * y * (mu + below) - y * y
        inner = np.sum(signs * (mu - y / 2.0), axis=-1) * f
        return -a[..., i] * f, 2.0 * signs[i] * y[..., i] * inner

    def stencil(values):
        return (-values[2] + 8.0 * values[1] - 8.0 * values[-1] + values[-2]) / (12.0 * h)

    total = np.zeros(points.shape[0])
    size = np.zeros(points.shape[0])
    for i in range(depth):
        drift, noise = {}, {}
        for k in (-2, -1, 1, 2):
            moved = points.copy()
            moved[:, i] += k * h
            drift[k], noise[k] = fluxes(moved, i)
        d_drift, d_noise = stencil(drift), stencil(noise)
        total += d_drift + d_noise
        size += np.abs(d_drift) + np.abs(d_noise)
    scale = float(size.max())
    residual = float(np.abs(total).max()) / scale if scale > 0 else 0.0
    logger.debug(f"Fokker-Planck residual (depth {depth}): {residual:.3e}")
    return residual
