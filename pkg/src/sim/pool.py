import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def config_hash(config: Dict) -> str:
    """64-bit BLAKE2b of the canonical JSON of a configuration."""
    text = json.dumps(config, sort_keys=True, default=str, separators=(',', ':'))
    return hashlib.blake2b(text.encode('utf-8'), digest_size=8).hexdigest()


@dataclass(frozen=True)
class SamplePool:
    """Monte Carlo samples with the provenance needed to regenerate them."""
    tag: str
    values: np.ndarray
    seed: int
    generator_id: str
    censored: Optional[np.ndarray] = None
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'values', np.asarray(self.values, dtype=float))
        if self.censored is not None:
            object.__setattr__(self, 'censored', np.asarray(self.censored, dtype=bool))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean()) if self.censored is not None and self.n else 0.0

    @property
    def config_hash(self) -> str:
        return config_hash(self.meta.get('config', {}))

    def column(self, i: int = 0) -> np.ndarray:
        return self.values if self.values.ndim == 1 else self.values[:, i]

    def to_frame(self) -> pd.DataFrame:
        if self.values.ndim == 1:
            df = pd.DataFrame({'value': self.values})
        else:
            df = pd.DataFrame(self.values, columns=[f"u{i + 1}" for i in range(self.values.shape[1])])
        if self.censored is not None:
            df['censored'] = self.censored
        return df

    def to_csv(self, path: str, manifest: str = "manifest.json") -> str:
        os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
        with open(path, 'w') as handle:
            handle.write(f"# tag: {self.tag}\n# seed: {self.seed}\n# generator: {self.generator_id}\n"
                         f"# config_hash: {self.config_hash}\n# manifest: {manifest}\n")
            self.to_frame().to_csv(handle, index=False, float_format='%.17g')
        logger.info(f"Saved {self.n} samples to {path}")
        return path


def histogram_export(pool: SamplePool, bin_edges: Sequence[float], column: int = 0) -> pd.DataFrame:
    """Counts and density on fixed bin edges; censored and non-finite samples are left out."""
    values = pool.column(column)
    keep = np.isfinite(values)
    if pool.censored is not None:
        keep &= ~pool.censored
    edges = np.asarray(bin_edges, dtype=float)
    counts, _ = np.histogram(values[keep], bins=edges)
    widths = np.diff(edges)
    total = max(int(keep.sum()), 1)
    return pd.DataFrame({
        'left': edges[:-1],
        'right': edges[1:],
        'count': counts,
        'density': counts / (total * widths),
    })
