import logging
from typing import Sequence, Union

import numpy as np

from src.cfrac import CFCoefficients, eval_cf_fixed
from src.expansion.chain import EnvironmentChain
from src.models.diffusion import DiffusionSpec
from src.models.zoo import identify_zoo, zoo_riccati

logger = logging.getLogger(__name__)

FD_STEP = 1e-4


def closure_tail(coeffs: CFCoefficients, lam):
    """Remainder closing the fraction after u_N.

    Fixed point of R = u_N + (2 lambda/a)/R with the last coefficient frozen;
    it reduces to the free-space value sqrt(2 lambda/a) when u_N = 0.
    """
    lam = np.asarray(lam)
    u_last = coeffs.u[-1] if coeffs.depth else 0.0
    disc = u_last * u_last + 4.0 * coeffs.scale * lam
    root = np.sqrt(disc.astype(complex)) if np.iscomplexobj(disc) or np.any(disc < 0) else np.sqrt(disc)
    root = np.where(np.real(root) < 0, -root, root)
    return 0.5 * (u_last + root)


def closed_fraction(coeffs: CFCoefficients, lam):
    if coeffs.depth == 0:
        return eval_cf_fixed(coeffs, lam)
    return eval_cf_fixed(coeffs, lam, tail=closure_tail(coeffs, lam))


def check_expansion(spec: DiffusionSpec, chain: Union[EnvironmentChain, CFCoefficients],
                    lam_grid: Sequence[float], x: float) -> float:
    """Max over lambda of the closed fraction's error at x.

    Zoo specs are compared with their closed forms; other specs report the
    residual of the inhomogeneous Riccati equation U' + U^2 + 2W'U - 2 lambda/a.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    coeffs = chain.coefficients_at(x) if isinstance(chain, EnvironmentChain) else chain
    branch = coeffs.branch
    model = identify_zoo(spec)
    if model is not None:
        values = np.asarray(closed_fraction(coeffs, lam_grid))
        reference = np.asarray(zoo_riccati(model, branch, x, lam_grid))
        residual = float(np.max(np.abs(values - reference)))
        logger.debug(f"closed-form residual at x={x}: {residual:.3e}")
        return residual
    if not isinstance(chain, EnvironmentChain):
        raise TypeError("custom specs need an EnvironmentChain for the Riccati residual")
    h = FD_STEP * max(1.0, abs(x))

    def u_at(y):
        return np.asarray(closed_fraction(chain.coefficients_at(y), lam_grid))

    derivative = (u_at(x + h) - u_at(x - h)) / (2.0 * h)
    u = u_at(x)
    a = float(spec.a(x))
    residual = derivative + u ** 2 + 2.0 * float(spec.wprime(x)) * u - 2.0 * lam_grid / a
    return float(np.max(np.abs(residual)))
