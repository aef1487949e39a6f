import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np


logger = logging.getLogger(__name__)

SEED_ENV = 'GRD_SEED'
DEFAULT_SEED = 0
SIGNIFICANT_DIGITS = 15

_T = TypeVar('_T')
_R = TypeVar('_R')


def resolve_seed(seed: int | None = None) -> int:
    """Seed from the argument, then the GRD_SEED environment variable, then 0."""
    if seed is not None:
        return int(seed)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is None or env_seed.strip() == '':
        return DEFAULT_SEED
    try:
        return int(env_seed)
    except ValueError:
        raise ValueError(f'{SEED_ENV} must be an integer, got {env_seed!r}')


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one work item.

    Streams are keyed by (seed, *stream), so results do not depend on how
    items are split across workers.
    """
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def parallel_map(
    func: Callable[[_T], _R],
    items: Iterable[_T],
    workers: int = 1,
) -> list[_R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug('parallel_map: %d items on %d workers', len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map keeps input order
        return list(pool.map(func, items))


def fmt_number(value: float) -> float | str:
    """Shortest round-trip representation at 15 significant digits."""
    value = float(value)
    if np.isnan(value):
        return 'nan'
    if np.isinf(value):
        return 'inf' if value > 0 else '-inf'
    rounded = float(f'{value:.{SIGNIFICANT_DIGITS}g}')
    if rounded == 0.0:
        return 0.0
    return rounded
