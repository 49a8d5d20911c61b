"""Closed-form construction of one pairing per admissible order.

The classical constructions are piecewise families of pairs (for the
exact-separation problem) and runs of labels (for the shifted problem),
both linear-time.  The pair families degenerate for the smallest
admissible orders, where ranges collide; those fall back to a search that
is instant at that size.  Every output is verified before it is returned,
so a bad branch can never escape.
"""

from __future__ import annotations

from .backtrack import first_solution
from .core import (ExistenceError, LabelSequence, PairList, Variant,
                   existence, sequence_from_pairs, verify)

# smallest admissible orders where the pair families collide
_FALLBACK = {Variant.SKOLEM: (1, 4, 5), Variant.LANGFORD: ()}


def _down(a: int, b: int):
    """Inclusive descending run a, a-2, ..., b; empty when a < b."""
    return range(a, b - 1, -2) if a >= b else range(0)


def _up(a: int, b: int):
    """Inclusive ascending run a, a+2, ..., b; empty when a > b."""
    return range(a, b + 1, 2) if a <= b else range(0)


def _skolem_pairs(n: int) -> PairList:
    k = n // 4
    by_diff = {}

    def put(a, b):
        by_diff[b - a] = (a, b)

    if n % 4 == 0:
        for r in range(2 * k):
            put(4 * k + r, 8 * k - r)
        put(2 * k + 1, 6 * k)
        put(2 * k, 4 * k - 1)
        for r in range(1, k):
            put(r, 4 * k - 1 - r)
        put(k, k + 1)
        for r in range(k - 2):
            put(k + 2 + r, 3 * k - 1 - r)
    else:
        for r in range(2 * k):
            put(4 * k + 2 + r, 8 * k + 2 - r)
        put(2 * k + 1, 6 * k + 2)
        put(2 * k + 2, 4 * k + 1)
        for r in range(1, k + 1):
            put(r, 4 * k + 1 - r)
        put(k + 1, k + 2)
        for r in range(1, k - 1):
            put(k + 2 + r, 3 * k + 1 - r)

    if sorted(by_diff) != list(range(1, n + 1)):
        raise AssertionError("pair families missed a difference at n=%d" % n)
    return PairList(n, tuple(by_diff[r] for r in range(1, n + 1)))


def _langford_labels(n: int) -> LabelSequence:
    k = (n + 1) // 4
    runs = [
        _down(4 * k - 4, 2 * k),
        (4 * k - 2,),
        _down(2 * k - 3, 1),
        (4 * k - 1,),
        _up(1, 2 * k - 3),
        _up(2 * k, 4 * k - 4),
    ]
    runs.append((4 * k,) if n % 4 == 0 else (2 * k - 1,))
    runs += [
        _down(4 * k - 3, 2 * k + 1),
        (4 * k - 2,),
        _down(2 * k - 2, 2),
        (2 * k - 1,),
        (4 * k - 1,),
        _up(2, 2 * k - 2),
        _up(2 * k + 1, 4 * k - 3),
    ]
    if n % 4 == 0:
        runs += [(2 * k - 1,), (4 * k,)]
    labels = tuple(v for run in runs for v in run)
    return LabelSequence(n, labels)


def construct(variant: Variant, n: int) -> LabelSequence:
    """One pairing of order n as a label sequence, in O(n).

    Raises ExistenceError for inadmissible orders.  The result always
    passes verify.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("order must be a positive integer, got %r" % (n,))
    if not existence(variant, n):
        raise ExistenceError(
            "no %s pairing of order %d exists (order must be 0 or %d mod 4)"
            % (variant.value, n, 1 if variant is Variant.SKOLEM else 3))
    if n in _FALLBACK[variant]:
        found = first_solution(variant, n)
        seq = sequence_from_pairs(found)
    elif variant is Variant.SKOLEM:
        seq = sequence_from_pairs(_skolem_pairs(n))
    else:
        seq = _langford_labels(n)
    if not verify(seq, variant):
        raise AssertionError(
            "constructed sequence failed verification at %s n=%d"
            % (variant.value, n))
    return seq


def construct_pairs(variant: Variant, n: int) -> PairList:
    """Same pairing as construct, as positions per label."""
    from .core import pairs_from_sequence
    return pairs_from_sequence(construct(variant, n))
