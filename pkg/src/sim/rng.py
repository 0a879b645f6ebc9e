"""Reproducible random streams: one generator per fixed-size block of paths or chains."""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from config.config import Config
from src.errors import ValidationError

T = TypeVar('T')


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for block `block` of a run seeded with `seed`."""
    if seed < 0 or block < 0:
        raise ValidationError(f"seed and block index must be nonnegative, got {seed}, {block}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block)]))


def generator_id(seed: int) -> str:
    return f"PCG64/SeedSequence([{seed}, block])"


def block_slices(n: int, size: int) -> List[Tuple[int, int, int]]:
    """(block index, start, stop) covering range(n) in blocks of `size`."""
    if size <= 0:
        raise ValidationError(f"block size must be positive, got {size}")
    return [(i, start, min(start + size, n)) for i, start in enumerate(range(0, n, size))]


def map_blocks(fn: Callable[[int, int, int], T], n: int, size: int,
               threads: Optional[int] = None) -> List[T]:
    """fn(block, start, stop) over all blocks, results in block order whatever the worker count."""
    slices = block_slices(n, size)
    threads = Config.DEFAULT_THREADS if threads is None else max(1, int(threads))
    if threads == 1 or len(slices) == 1:
        return [fn(*s) for s in slices]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(lambda s: fn(*s), slices))
