"""Closed-form diffusions: Brownian motion with drift and Bessel processes."""
import functools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import special

from src.cfrac.series import series_div
from src.errors import DomainError, ValidationError
from src.models.diffusion import (
    BoundaryBehavior, DiffusionSpec, EndpointClass, NEG_INF, POS_INF, behavior_for, classify_endpoint,
)
from src.models.functions import RealFunction, constant, exponential, power_law
from src.specialfn import bessel_i_scaled, bessel_k_scaled

logger = logging.getLogger(__name__)

BROWNIAN_DRIFT = "brownian_drift"
BESSEL = "bessel"


@dataclass(frozen=True)
class ZooModel:
    family: str
    mu: float = 0.0
    p: float = 0.0
    zero_boundary: Optional[BoundaryBehavior] = None
    x0: float = 0.0
    spec: Optional[DiffusionSpec] = None

    @property
    def killing_type(self) -> bool:
        """Bessel minus-branch eigenfunction vanishes at 0."""
        return self.family == BESSEL and (self.zero_boundary == BoundaryBehavior.KILLING or self.p <= -1)

    @property
    def key(self):
        """Parameters that identify the model, without its start point."""
        return (self.family, self.mu, self.p, self.zero_boundary)

    def describe(self) -> str:
        if self.family == BROWNIAN_DRIFT:
            return f"BM(mu={self.mu:g})"
        suffix = f", 0 {self.zero_boundary.value}" if self.zero_boundary else ""
        return f"BES({self.p:g}{suffix})"

    def to_json(self) -> Dict:
        if self.family == BROWNIAN_DRIFT:
            return {'family': 'bm', 'mu': self.mu, 'x0': self.x0}
        return {'family': 'bessel', 'p': self.p, 'x0': self.x0,
                'zero_boundary': self.zero_boundary.value if self.zero_boundary else 'none'}


def brownian_drift(mu: float, x0: float = 0.0) -> ZooModel:
    mu = float(mu)
    spec = DiffusionSpec(
        interval=(NEG_INF, POS_INF),
        a=constant(1.0),
        wprime=constant(mu),
        x0=x0,
        left=BoundaryBehavior.NATURAL,
        right=BoundaryBehavior.NATURAL,
        label=f"BM(mu={mu:g})",
        w_potential=RealFunction(eval=lambda x: mu * (np.asarray(x, dtype=float) - x0),
                                 deriv=lambda x: mu + 0.0 * np.asarray(x, dtype=float)),
    )
    return ZooModel(family=BROWNIAN_DRIFT, mu=mu, x0=x0, spec=spec)


def _bessel_spec(p: float, x0: float, left: BoundaryBehavior) -> DiffusionSpec:
    c = p + 0.5
    return DiffusionSpec(
        interval=(0.0, POS_INF),
        a=constant(1.0),
        wprime=power_law(c, -1.0, 1.0),
        x0=x0,
        left=left,
        right=BoundaryBehavior.NATURAL,
        label=f"BES({p:g})",
        w_potential=RealFunction(eval=lambda x: c * np.log(np.asarray(x, dtype=float) / x0),
                                 deriv=lambda x: c / np.asarray(x, dtype=float)),
    )


@functools.lru_cache(maxsize=256)
def _bessel_zero_class(p: float) -> EndpointClass:
    # classification does not depend on x0 or on the declared kinds
    return classify_endpoint(_bessel_spec(p, 1.0, BoundaryBehavior.NATURAL), 'left')


def bessel(p: float, x0: float = 1.0, zero_boundary: Optional[BoundaryBehavior] = None) -> ZooModel:
    p = float(p)
    if not x0 > 0:
        raise ValidationError(f"Bessel start point must be positive, got {x0}")
    left = behavior_for(_bessel_zero_class(p), zero_boundary)
    zero = left if left.is_regular_kind else None
    spec = _bessel_spec(p, x0, left)
    if zero is not None:
        spec = DiffusionSpec(interval=spec.interval, a=spec.a, wprime=spec.wprime, x0=x0, left=left,
                             right=spec.right, label=f"BES({p:g}, 0 {zero.value})",
                             w_potential=spec.w_potential)
    return ZooModel(family=BESSEL, p=p, zero_boundary=zero, x0=x0, spec=spec)


def zoo_parameters(spec: DiffusionSpec, rtol: float = 1e-12) -> Optional[Tuple[str, float]]:
    """(family, mu or p) read off the characteristics, ignoring boundary kinds."""
    if spec.l == NEG_INF and spec.r == POS_INF:
        points = np.array([-1.7, -0.3, 0.4, 2.2]) + spec.x0
    elif spec.l == 0.0 and spec.r == POS_INF:
        points = np.array([0.3, 0.9, 1.6, 4.1])
    else:
        return None
    a = np.array([float(spec.a(x)) for x in points])
    if not np.allclose(a, 1.0, rtol=rtol, atol=rtol):
        return None
    w = np.array([float(spec.wprime(x)) for x in points])
    if spec.l == NEG_INF:
        if np.allclose(w, w[0], rtol=1e-10, atol=1e-12):
            return BROWNIAN_DRIFT, float(np.round(w[0], 12))
        return None
    xw = points * w
    if not np.allclose(xw, xw[0], rtol=1e-10, atol=1e-12):
        return None
    return BESSEL, float(np.round(xw[0] - 0.5, 12))


def identify_zoo(spec: DiffusionSpec, rtol: float = 1e-12) -> Optional[ZooModel]:
    """Recognize Brownian-drift or Bessel characteristics; None otherwise."""
    found = zoo_parameters(spec, rtol)
    if found is None:
        return None
    family, value = found
    if family == BROWNIAN_DRIFT:
        return brownian_drift(value, x0=spec.x0)
    zero = spec.left if spec.left.is_regular_kind else None
    return bessel(value, x0=spec.x0, zero_boundary=zero)


def endpoint_class(spec: DiffusionSpec, side: str) -> EndpointClass:
    """Feller class of an endpoint, from the zoo tables when the spec is recognized."""
    found = zoo_parameters(spec)
    if found is None:
        return classify_endpoint(spec, side)
    family, value = found
    if family == BESSEL and side == 'left':
        return _bessel_zero_class(value)
    return EndpointClass.NATURAL


def _as_lambda(lam):
    lam = np.asarray(lam)
    return lam if np.iscomplexobj(lam) else lam.astype(float)


def _i_ratio(top: float, bottom: float, w):
    """I_top(w)/I_bottom(w) via exponentially scaled values."""
    if np.isrealobj(w):
        return np.vectorize(lambda t: bessel_i_scaled(top, t) / bessel_i_scaled(bottom, t))(w)
    return special.ive(top, w) / special.ive(bottom, w)


def _k_ratio(top: float, bottom: float, w):
    if np.isrealobj(w):
        return np.vectorize(lambda t: bessel_k_scaled(top, t) / bessel_k_scaled(bottom, t))(w)
    return special.kve(top, w) / special.kve(bottom, w)


def riccati_at_zero(model: ZooModel, branch: str, x: float) -> float:
    """U(x, 0) as the lambda -> 0+ limit of the closed forms."""
    if model.family == BROWNIAN_DRIFT:
        mu = model.mu
        return -mu + abs(mu) if branch == 'minus' else -mu - abs(mu)
    p = model.p
    if branch == 'minus':
        return -2.0 * p / x if model.killing_type else 0.0
    return -2.0 * p / x if p > 0 else 0.0


def zoo_riccati(model: ZooModel, branch: str, x, lam):
    """U(x, lambda) for the zoo closed forms, real or complex lambda."""
    if branch not in ('plus', 'minus'):
        raise ValidationError(f"branch must be 'plus' or 'minus', got {branch!r}")
    lam = _as_lambda(lam)
    x = np.asarray(x, dtype=float)
    if model.family == BROWNIAN_DRIFT:
        mu = model.mu
        disc = mu * mu + 2.0 * lam
        if np.isrealobj(disc):
            if np.any(disc < 0):
                raise DomainError(f"lambda on the branch cut (-inf, {-mu * mu / 2}]")
            root = np.sqrt(disc)
        else:
            root = np.sqrt(disc.astype(complex))
        value = -mu - root if branch == 'plus' else -mu + root
        return value + 0.0 * x

    if np.any(x <= 0):
        raise DomainError("Bessel Riccati variable needs x > 0")
    p = model.p
    if np.isrealobj(lam) and np.any(lam < 0):
        raise DomainError("real negative lambda: pass a complex value off the cut")
    zero = (lam == 0)
    safe = np.where(zero, 1.0, lam)
    s = np.sqrt(2.0 * safe) if np.isrealobj(safe) else np.sqrt(2.0 * safe.astype(complex))
    w = s * x
    if branch == 'minus':
        if model.killing_type:
            value = s * _i_ratio(-p - 1.0, -p, w)
        else:
            value = s * _i_ratio(p + 1.0, p, w)
    else:
        value = -s * _k_ratio(p + 1.0, p, w)
    limit = riccati_at_zero(model, branch, 1.0) / x
    return np.where(zero, limit, value) if np.ndim(value) else (limit if bool(zero) else value)


def zoo_phi0(model: ZooModel, branch: str) -> RealFunction:
    """phi(., 0) normalized to 1 at x0."""
    if model.family == BROWNIAN_DRIFT:
        mu = model.mu
        rate = -mu - abs(mu) if branch == 'plus' else -mu + abs(mu)
        return exponential(rate, model.x0) if rate != 0 else constant(1.0)
    p = model.p
    if branch == 'plus':
        decaying = p > 0
    else:
        decaying = model.killing_type
    if decaying:
        return power_law(1.0, -2.0 * p, model.x0)
    return constant(1.0)


def zoo_taylor_coefficients(model: ZooModel, branch: str, x: float, n_terms: int) -> np.ndarray:
    """c_1..c_K of the expansion of -/+(U(x, lambda) - U(x, 0)) in lambda."""
    k = np.arange(1, n_terms + 1)
    if model.family == BROWNIAN_DRIFT:
        mu = abs(model.mu)
        if mu == 0:
            raise DomainError("sqrt(2 lambda) has no Taylor series at 0 (mu = 0)")
        return mu * special.binom(0.5, k) * (2.0 / mu ** 2) ** k
    if branch == 'plus':
        raise DomainError("the Bessel plus branch is not analytic at lambda = 0")
    nu = -model.p if model.killing_type else model.p
    if nu <= -1:
        raise DomainError(f"Bessel series needs order > -1, got {nu}")
    j = np.arange(n_terms + 1)
    # U = (1/x) V(lambda x^2), V(t) = t A(t)/B(t)
    log_fact = special.gammaln(j + 1)
    A = np.exp(-log_fact - j * math.log(2.0)) * special.rgamma(nu + j + 2.0)
    B = np.exp(-log_fact - j * math.log(2.0)) * special.rgamma(nu + j + 1.0)
    ratio = series_div(A, B, n_terms)
    return ratio * x ** (2.0 * k - 1.0)
