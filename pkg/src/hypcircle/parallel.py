"""
Deterministic parallel helpers: seeded substreams, chunking and an
order-preserving joblib map with optional stderr progress.
"""

import logging
import sys
from typing import Callable, List, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Monte Carlo work is split into chunks of this many samples, each with its own
# substream, so the worker count never changes the numbers drawn.
SAMPLE_CHUNK = 256

_progress_enabled = False


def configure_progress(enabled: bool) -> None:
    global _progress_enabled
    _progress_enabled = enabled


def progress(iterable, desc: str = "", total: int = None):
    return tqdm(iterable, desc=desc, total=total, file=sys.stderr, disable=not _progress_enabled, leave=False)


def spawn_seeds(seed: int, n: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def spawn_rngs(seed: int, n: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in spawn_seeds(seed, n)]


def chunked(seq: Sequence[T], size: int) -> List[Sequence[T]]:
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def chunk_sizes(n: int, size: int = SAMPLE_CHUNK) -> List[int]:
    return [min(size, n - start) for start in range(0, n, size)]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1, desc: str = "") -> List[R]:
    """Apply `fn` to every item; results come back in input order for any worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in progress(items, desc=desc)]
    logger.debug("dispatching %d tasks to %d workers", len(items), workers)
    return Parallel(n_jobs=workers)(delayed(fn)(item) for item in progress(items, desc=desc))
