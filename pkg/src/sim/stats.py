"""ECDF, Kolmogorov-Smirnov distances and sample correlation."""
from typing import Callable, Union

import numpy as np
from scipy import stats

from src.errors import ValidationError
from src.sim.pool import SamplePool

Samples = Union[SamplePool, np.ndarray]


def _values(samples: Samples, column: int = 0) -> np.ndarray:
    if isinstance(samples, SamplePool):
        values = samples.column(column)
    else:
        values = np.asarray(samples, dtype=float)
        values = values[:, column] if values.ndim == 2 else values
    if values.size == 0:
        raise ValidationError("empty sample")
    # never-hit samples compare above every finite value
    return np.where(np.isposinf(values), np.finfo(float).max, values)


def ecdf(samples: Samples, column: int = 0) -> Callable:
    ordered = np.sort(_values(samples, column))
    n = ordered.size
    return lambda t: np.searchsorted(ordered, t, side='right') / n


def ks_one_sample(samples: Samples, cdf: Callable, column: int = 0) -> float:
    return float(stats.kstest(_values(samples, column), cdf).statistic)


def ks_two_sample(first: Samples, second: Samples, column: int = 0) -> float:
    return float(stats.ks_2samp(_values(first, column), _values(second, column)).statistic)


def correlation(samples: Samples, i: int, j: int) -> float:
    return float(np.corrcoef(_values(samples, i), _values(samples, j))[0, 1])


def standard_error(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    return float(values.std(ddof=1) / np.sqrt(values.size))
