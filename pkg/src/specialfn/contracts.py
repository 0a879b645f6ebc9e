from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np


@dataclass(frozen=True)
class AccuracyContract:
    """Tolerances a special function promises on its validity range."""
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    domain: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def accepts(self, value, reference) -> bool:
        value = np.asarray(value, dtype=float)
        reference = np.asarray(reference, dtype=float)
        bound = self.abs_tol + self.rel_tol * np.abs(reference)
        return bool(np.all(np.abs(value - reference) <= bound))


BESSEL_CONTRACT = AccuracyContract(domain={'p': (-50.0, 50.0), 'z': (1e-6, 700.0)})
GAMMA_CONTRACT = AccuracyContract(domain={'x': (0.0, 171.0)})
INC_GAMMA_CONTRACT = AccuracyContract(domain={'a': (0.0, np.inf), 'x': (0.0, np.inf)})

CONTRACTS = {
    'bessel_i': BESSEL_CONTRACT,
    'bessel_k': BESSEL_CONTRACT,
    'bessel_j': BESSEL_CONTRACT,
    'bessel_y': BESSEL_CONTRACT,
    'gamma_fn': GAMMA_CONTRACT,
    'reg_inc_gamma_lower': INC_GAMMA_CONTRACT,
}
