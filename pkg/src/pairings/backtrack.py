"""Exact counting and enumeration by backtracking search.

Labels are placed from the widest separation down to the narrowest, and
for each label the left position is scanned from the left edge.  Wide
labels have the fewest placements, so they prune fastest.  The search
state is a 2n-bit occupancy mask.

Counting is feasible well past enumeration: the count-only guard is set
where a single-core run stays under roughly a day, the enumeration guard
where the number of sequences itself stays manageable.
"""

from __future__ import annotations

from typing import Callable, Optional

from . import _kernels
from .core import (CapacityError, CountMode, LabelSequence, PairList,
                   Variant, existence)

COUNT_LIMIT = {Variant.SKOLEM: 21, Variant.LANGFORD: 24}
ENUMERATE_LIMIT = 13


def _check_n(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("order must be a positive integer, got %r" % (n,))


def count_exact(variant: Variant, n: int,
                mode: CountMode = CountMode.UP_TO_REFLECTION) -> int:
    """Number of pairings of the given order, by exhaustive search.

    Orders that fail the residue test are answered 0 without searching.
    Raises CapacityError above the per-variant guard, where the search
    would no longer finish in reasonable time.
    """
    _check_n(n)
    if n > COUNT_LIMIT[variant]:
        raise CapacityError(
            "backtracking count for %s order %d exceeds the n <= %d guard"
            % (variant.value, n, COUNT_LIMIT[variant]))
    if not existence(variant, n):
        return 0
    total = _kernels.impl.backtrack_count(n, variant.sep_offset)
    if mode is CountMode.ALL_SEQUENCES or n == 1:
        return total
    if total % 2:
        raise AssertionError(
            "sequence total %d is odd; reflection pairing broken" % total)
    return total // 2


def enumerate_sequences(variant: Variant, n: int,
                        visitor: Callable[[LabelSequence], None]) -> int:
    """Invoke visitor on every complete sequence, in search order.

    Returns the number of sequences visited (the ALL_SEQUENCES count).
    The order is deterministic: the widest label moves rightmost slowest.
    """
    _check_n(n)
    if n > ENUMERATE_LIMIT:
        raise CapacityError(
            "enumeration for order %d exceeds the n <= %d guard"
            % (n, ENUMERATE_LIMIT))

    def adapt(labels):
        visitor(LabelSequence(n, tuple(labels)))

    return _kernels.impl.backtrack_enumerate(n, variant.sep_offset, adapt)


def first_solution(variant: Variant, n: int) -> Optional[PairList]:
    """First pairing in search order, or None.  Small orders only."""
    _check_n(n)
    n2 = 2 * n
    sep_off = variant.sep_offset
    pairs = [(0, 0)] * n

    def place(r: int, occ: int) -> bool:
        if r == 0:
            return True
        sep = r + sep_off
        for a in range(n2 - sep):
            m = (1 << a) | (1 << (a + sep))
            if not occ & m:
                pairs[r - 1] = (a + 1, a + 1 + sep)
                if place(r - 1, occ | m):
                    return True
        return False

    if place(n, 0):
        return PairList(n, tuple(pairs))
    return None
