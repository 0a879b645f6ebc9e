from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from src.cfrac import CFCoefficients, branch_sign
from src.models.diffusion import DiffusionSpec
from src.models.functions import RealFunction


@dataclass(frozen=True)
class EnvironmentChain:
    """Environments W_n' and homogeneous Riccati solutions u_n, level by level.

    `us` are stored in the raw convention U = u_0 + (2 lambda/a)/(u_1 + ...),
    in which the Stieltjes regime reads -/+u_n > 0 for n >= 1.
    """
    spec: DiffusionSpec
    wprimes: Tuple[RealFunction, ...]
    us: Tuple[RealFunction, ...]
    branch: str
    anchors: Tuple[str, ...] = field(default=())

    @property
    def depth(self) -> int:
        return len(self.us) - 1

    def coefficients_at(self, x: float) -> CFCoefficients:
        sign = branch_sign(self.branch)
        raw = np.array([float(u(x)) for u in self.us])
        return CFCoefficients(u0=raw[0], u=sign * raw[1:], scale=2.0 / float(self.spec.a(x)),
                              branch=self.branch, x=x)

    def recurrence_residual(self, grid: Sequence[float]) -> float:
        """max |W_n' - (a'/2a - u_{n-1} - W_{n-1}')| over the grid."""
        grid = np.asarray(grid, dtype=float)
        a = self.spec.a
        worst = 0.0
        for n in range(1, len(self.wprimes)):
            expected = (a.derivative(grid) / (2.0 * a(grid)) - self.us[n - 1](grid)
                        - self.wprimes[n - 1](grid))
            worst = max(worst, float(np.max(np.abs(self.wprimes[n](grid) - expected))))
        return worst

    def riccati_residual(self, grid: Sequence[float]) -> float:
        """max |u_n' + u_n^2 + 2 W_n' u_n| over levels and grid."""
        grid = np.asarray(grid, dtype=float)
        worst = 0.0
        for u, w in zip(self.us, self.wprimes):
            value = u.derivative(grid) + u(grid) ** 2 + 2.0 * w(grid) * u(grid)
            worst = max(worst, float(np.max(np.abs(value))))
        return worst

    def to_json(self, grid: Sequence[float]) -> Dict:
        grid = [float(x) for x in grid]
        return {
            'branch': self.branch,
            'grid': grid,
            'anchors': list(self.anchors),
            'levels': [
                {'n': n, 'u': [float(u(x)) for x in grid], 'wprime': [float(w(x)) for x in grid]}
                for n, (u, w) in enumerate(zip(self.us, self.wprimes))
            ],
        }
