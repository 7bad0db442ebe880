"""Chunked enumeration of the node grid (m,)*τ."""

from typing import Iterator

import numpy as np

from .exceptions import ExactCapacityError

DEFAULT_CHUNK = 1 << 16


def grid_size(order: int, tau: int) -> int:
    return int(order) ** int(tau)


def check_capacity(order: int, tau: int, cap: int) -> int:
    """Return m^τ.

    Raises:
        ExactCapacityError: If m^τ exceeds ``cap``
    """
    size = grid_size(order, tau)
    if size > cap:
        raise ExactCapacityError(size, cap, {"order": order, "tau": tau})
    return size


def iter_index_chunks(
    order: int, tau: int, chunk_size: int = DEFAULT_CHUNK
) -> Iterator[np.ndarray]:
    """Yield node-index configurations in lexicographic order, shape (N, τ)."""
    total = grid_size(order, tau)
    powers = order ** np.arange(tau - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk_size):
        flat = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        yield (flat[:, None] // powers[None, :]) % order
