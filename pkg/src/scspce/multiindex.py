"""Total-degree multi-index sets indexing the polynomial chaos basis."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

_INT64_MAX = 2**63 - 1


def cardinality(d: int, p: int) -> int:
    """Number of multi-indices in ``N_0^d`` with total degree at most ``p``.

    Raises ``OverflowError`` when the count does not fit a signed 64-bit
    integer.
    """
    if d < 1 or p < 0:
        raise ValueError(f"need d >= 1 and p >= 0, got d={d}, p={p}")
    n = math.comb(d + p, p)
    if n > _INT64_MAX:
        raise OverflowError(f"binomial({d}+{p}, {p}) exceeds the int64 range")
    return n


@lru_cache(maxsize=None)
def _compositions(length: int, total: int) -> tuple[tuple[int, ...], ...]:
    # all tuples of `length` non-negative ints summing to `total`, ascending lex
    if length == 1:
        return ((total,),)
    out = []
    for first in range(total + 1):
        for rest in _compositions(length - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


class IndexSet:
    """Ordered, immutable set of multi-indices.

    Entries are kept in graded lexicographic order: total degree ascending,
    then ascending lexicographic comparison of the exponent tuples. The
    position of an index in this order is the column of that basis function
    in the sampling matrix.

    Parameters
    ----------
    entries : iterable of sequences of int
        Distinct multi-indices, all of length ``d``.
    order : int, optional
        Nominal polynomial order (largest total degree) of the set.
    """

    def __init__(self, entries: Iterable[Sequence[int]], order: Optional[int] = None):
        tuples = [tuple(int(v) for v in nu) for nu in entries]
        if not tuples:
            raise ValueError("an index set needs at least one multi-index")
        d = len(tuples[0])
        for nu in tuples:
            if len(nu) != d:
                raise ValueError("multi-indices must share the same length")
            if min(nu) < 0:
                raise ValueError(f"negative entry in multi-index {nu}")
        tuples.sort(key=_graded_lex_key)
        self._entries = tuple(tuples)
        self._positions = {nu: i for i, nu in enumerate(self._entries)}
        if len(self._positions) != len(self._entries):
            raise ValueError("duplicate multi-indices")
        self.d = d
        self.p = max(sum(nu) for nu in tuples) if order is None else int(order)
        self._array = None

    @property
    def entries(self) -> tuple[tuple[int, ...], ...]:
        return self._entries

    def as_array(self) -> np.ndarray:
        """Entries as an ``(N, d)`` integer array (read-only)."""
        if self._array is None:
            arr = np.array(self._entries, dtype=np.int64).reshape(len(self), self.d)
            arr.flags.writeable = False
            self._array = arr
        return self._array

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self._entries[i]

    def __contains__(self, nu) -> bool:
        return tuple(nu) in self._positions

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexSet) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"IndexSet(d={self.d}, p={self.p}, N={len(self)})"

    def position(self, nu: Sequence[int]) -> Optional[int]:
        return position_of(self, nu)

    def is_downward_closed(self) -> bool:
        for nu in self._entries:
            for j, v in enumerate(nu):
                if v > 0 and (nu[:j] + (v - 1,) + nu[j + 1:]) not in self._positions:
                    return False
        return True


def _graded_lex_key(nu: tuple[int, ...]):
    return (sum(nu), nu)


def total_degree_set(d: int, p: int) -> IndexSet:
    """All multi-indices of length ``d`` with ``|nu|_1 <= p``.

    Examples
    --------
    >>> len(total_degree_set(20, 2))
    231
    >>> total_degree_set(2, 1).entries
    ((0, 0), (0, 1), (1, 0))
    """
    n = cardinality(d, p)
    entries = []
    for degree in range(p + 1):
        entries.extend(_compositions(d, degree))
    assert len(entries) == n
    return IndexSet(entries, order=p)


def position_of(index_set: IndexSet, nu: Sequence[int]) -> Optional[int]:
    """Position of ``nu`` in ``index_set``, or ``None`` if it is not a member."""
    nu = tuple(int(v) for v in nu)
    if len(nu) != index_set.d:
        raise ValueError(f"multi-index has length {len(nu)}, expected {index_set.d}")
    return index_set._positions.get(nu)
