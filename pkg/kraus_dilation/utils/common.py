"""Common utilities used across the simulator."""

import enum
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

from ..core.exceptions import ConfigInvalid

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "SIM_THREADS"


# Python version compatibility for StrEnum
if sys.version_info < (3, 11):
    class StrEnum(str, enum.Enum):
        """String enumeration for Python < 3.11 compatibility."""

        def __str__(self) -> str:
            return self.value
else:
    class StrEnum(enum.StrEnum):
        """String enumeration using native StrEnum for Python >= 3.11."""
        pass


class EstimationMode(StrEnum):
    """How measurement probabilities are obtained from a dilated state."""

    EXACT = "exact"
    SAMPLED = "sampled"


class NormKind(StrEnum):
    FROBENIUS = "frobenius"
    SPECTRAL = "spectral"


def max_workers() -> int:
    """Worker count for parallel sections, capped by ``SIM_THREADS``."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigInvalid(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ConfigInvalid(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    return value


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """Apply ``fn`` to every item, preserving order.

    Callers reduce the returned list sequentially, so the result never
    depends on the worker count.
    """
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from a user seed and integer keys."""
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
