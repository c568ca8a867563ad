"""Unit-interval symbols and alignment of symbol id vectors.

Every set in this package is an affine or polynomial image of symbols that
range over [-1, 1].  A symbol's identity is a plain integer id: two sets
mentioning the same id depend on the same underlying variable, which is what
lets expressions like x - x collapse to zero width instead of doubling it.
Ids are never recycled within a provider, so distinct allocations are
guaranteed independent.
"""

from __future__ import annotations

import threading

import numpy as np

_MAX_ID = 2**63 - 1


class SymbolProvider:
    """Thread-safe source of fresh symbol ids, strictly increasing."""

    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("id counter must start at a non-negative value")
        self._next = int(start)
        self._lock = threading.Lock()

    def fresh_ids(self, n: int) -> np.ndarray:
        """Allocate ``n`` previously unused ids, returned as an int64 vector."""
        if n < 0:
            raise ValueError(f"cannot allocate {n} ids")
        with self._lock:
            base = self._next
            if base + n > _MAX_ID:
                # practically unreachable; guards the id-uniqueness contract
                raise OverflowError("symbol id space exhausted")
            self._next = base + n
        return np.arange(base, base + n, dtype=np.int64)

    @property
    def allocated(self) -> int:
        """Number of ids handed out so far."""
        return self._next


DEFAULT_PROVIDER = SymbolProvider()


def fresh_ids(n: int, provider: SymbolProvider | None = None) -> np.ndarray:
    """Allocate ``n`` fresh ids from ``provider`` (module default if None)."""
    return (provider if provider is not None else DEFAULT_PROVIDER).fresh_ids(n)


def as_id_vector(ids) -> np.ndarray:
    """Coerce to a 1-D int64 id vector without losing values."""
    out = np.atleast_1d(np.asarray(ids, dtype=np.int64))
    if out.ndim != 1:
        raise ValueError("id vectors must be one-dimensional")
    if out.size and out.min() < 0:
        raise ValueError("symbol ids are non-negative")
    return out


def align(left, right):
    """Merge two id vectors into a common one covering both operands.

    The merged vector lists shared ids first, then ids found only in
    ``left``, then ids found only in ``right``; within each block the order
    of first appearance in the owning operand is kept, so the result is a
    pure function of the operands.

    Returns:
        (merged, pos_left, pos_right) where ``pos_left[k]`` is the column of
        ``merged`` holding ``left[k]``, and likewise for ``pos_right``.
    """
    left = as_id_vector(left)
    right = as_id_vector(right)
    left_list = left.tolist()
    right_list = right.tolist()
    in_left = set(left_list)
    in_right = set(right_list)

    shared = [i for i in left_list if i in in_right]
    only_left = [i for i in left_list if i not in in_right]
    only_right = [j for j in right_list if j not in in_left]

    merged = np.array(shared + only_left + only_right, dtype=np.int64)
    column = {s: k for k, s in enumerate(merged.tolist())}
    pos_left = np.fromiter((column[i] for i in left_list), dtype=np.int64, count=len(left_list))
    pos_right = np.fromiter((column[j] for j in right_list), dtype=np.int64, count=len(right_list))
    return merged, pos_left, pos_right
