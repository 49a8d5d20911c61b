"""Skolem and Langford pairings: problem definitions and solution forms.

A Skolem pairing of order n distributes the positions 1..2n into n pairs
(a_r, b_r) with b_r - a_r = r for r = 1..n.  Written as a sequence of
labels, the two copies of label r sit exactly r positions apart, e.g.
4,2,3,2,4,3,1,1.  The Langford variant separates the two copies of r by r
intervening numbers, i.e. their positions differ by r + 1, e.g.
2,3,4,2,1,3,1,4.

Skolem pairings exist iff n = 0 or 1 (mod 4); Langford pairings exist iff
n = 0 or 3 (mod 4).  Counts come in two conventions: every sequence counted
separately, or a sequence identified with its left-right mirror.  No valid
sequence with n > 1 is a palindrome, so the first count is exactly twice
the second.

Positions are 1-based everywhere in the public types.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence


class PairingError(Exception):
    """Base class for all domain errors raised by this package."""


class MalformedSequenceError(PairingError, ValueError):
    """Input cannot be read as a candidate sequence (wrong label multiset)."""


class InvalidPairsError(PairingError, ValueError):
    """Pair positions do not cover 1..2n exactly once."""


class ExistenceError(PairingError, ValueError):
    """No pairing exists for the requested variant and order."""


class CapacityError(PairingError):
    """The requested computation exceeds a counter's safe operating range."""


class Variant(enum.Enum):
    """Which separation rule the two copies of each label obey."""

    SKOLEM = "skolem"
    LANGFORD = "langford"

    @property
    def sep_offset(self) -> int:
        """Separation of label r is r + sep_offset positions."""
        return 0 if self is Variant.SKOLEM else 1

    def separation(self, label: int) -> int:
        return label + self.sep_offset

    @classmethod
    def from_string(cls, text: str) -> "Variant":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown variant {text!r}; expected skolem or langford") from None


class CountMode(enum.Enum):
    """Count every sequence, or identify a sequence with its mirror image."""

    ALL_SEQUENCES = "all"
    UP_TO_REFLECTION = "reflect"

    @classmethod
    def from_string(cls, text: str) -> "CountMode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown mode {text!r}; expected all or reflect") from None


@dataclass(frozen=True)
class PairList:
    """n position pairs indexed by label: pairs[r-1] holds label r's positions.

    May hold candidate placements that break the separation or coverage
    rules; validity is a property of (pairs, variant) checked separately.
    """

    n: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("order n must be positive")
        if len(self.pairs) != self.n:
            raise ValueError(f"expected {self.n} pairs, got {len(self.pairs)}")

    def positions(self) -> list[int]:
        """All 2n positions in label order (not necessarily a permutation)."""
        out = []
        for a, b in self.pairs:
            out.append(a)
            out.append(b)
        return out


@dataclass(frozen=True)
class LabelSequence:
    """Length-2n array of labels; a valid sequence holds each of 1..n twice."""

    n: int
    labels: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("order n must be positive")
        if len(self.labels) != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} labels, got {len(self.labels)}")

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "LabelSequence":
        labels = tuple(labels)
        if len(labels) == 0 or len(labels) % 2 != 0:
            raise MalformedSequenceError(f"sequence length {len(labels)} is not a positive even number")
        return cls(len(labels) // 2, labels)


def existence(variant: Variant, n: int) -> bool:
    """Whether a valid pairing of order n exists for the variant."""
    if n < 1:
        raise ValueError("order n must be positive")
    if variant is Variant.SKOLEM:
        return n % 4 in (0, 1)
    return n % 4 in (0, 3)


def _occurrences(seq: LabelSequence) -> list[tuple[int, int]]:
    """First and second position (1-based) of each label 1..n.

    Raises MalformedSequenceError unless every label 1..n appears exactly
    twice; malformed input must never be silently reported as invalid.
    """
    n = seq.n
    first = [0] * (n + 1)
    second = [0] * (n + 1)
    for pos, label in enumerate(seq.labels, start=1):
        if not 1 <= label <= n:
            raise MalformedSequenceError(f"label {label} out of range 1..{n}")
        if first[label] == 0:
            first[label] = pos
        elif second[label] == 0:
            second[label] = pos
        else:
            raise MalformedSequenceError(f"label {label} appears more than twice")
    for label in range(1, n + 1):
        if second[label] == 0:
            raise MalformedSequenceError(f"label {label} appears fewer than twice")
    return [(first[r], second[r]) for r in range(1, n + 1)]


def verify(seq: LabelSequence, variant: Variant) -> bool:
    """True iff every label's occurrence distance matches the variant rule."""
    occ = _occurrences(seq)
    return all(b - a == variant.separation(r) for r, (a, b) in enumerate(occ, start=1))


def verify_pairs(pairs: PairList, variant: Variant) -> bool:
    """True iff the pairs obey the separation rule and tile 1..2n exactly."""
    seen = set()
    for r, (a, b) in enumerate(pairs.pairs, start=1):
        if b - a != variant.separation(r):
            return False
        seen.add(a)
        seen.add(b)
    return seen == set(range(1, 2 * pairs.n + 1))


def pairs_from_sequence(seq: LabelSequence) -> PairList:
    """Extract each label's two positions.  Input must hold every label twice."""
    return PairList(seq.n, tuple(_occurrences(seq)))


def sequence_from_pairs(pairs: PairList) -> LabelSequence:
    """Place each label at its two positions.  Positions must tile 1..2n."""
    n = pairs.n
    labels = [0] * (2 * n)
    for r, (a, b) in enumerate(pairs.pairs, start=1):
        for pos in (a, b):
            if not 1 <= pos <= 2 * n:
                raise InvalidPairsError(f"position {pos} out of range 1..{2 * n}")
            if labels[pos - 1] != 0:
                raise InvalidPairsError(f"position {pos} used by labels {labels[pos - 1]} and {r}")
            labels[pos - 1] = r
    return LabelSequence(n, tuple(labels))


def reflect(seq: LabelSequence) -> LabelSequence:
    """Mirror image: position i maps to 2n+1-i.  Preserves validity."""
    return LabelSequence(seq.n, tuple(reversed(seq.labels)))


def format_sequence(seq: LabelSequence) -> str:
    """Comma-separated label text, e.g. '4,2,3,2,4,3,1,1'."""
    return ",".join(str(v) for v in seq.labels)


def parse_sequence(text: str) -> LabelSequence:
    """Parse comma- or space-separated labels."""
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    try:
        labels = [int(p) for p in parts]
    except ValueError:
        raise MalformedSequenceError(f"cannot parse sequence text {text!r}") from None
    return LabelSequence.from_labels(labels)


def format_pairs(pairs: PairList) -> str:
    """Pair text in label order, e.g. '(8,9) (3,5) (1,4) (6,10) (2,7)'."""
    return " ".join(f"({a},{b})" for a, b in pairs.pairs)


def parse_pairs(text: str) -> PairList:
    """Parse '(a,b)' pair text in label order."""
    found = re.findall(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)", text)
    if not found:
        raise MalformedSequenceError(f"cannot parse pair text {text!r}")
    return PairList(len(found), tuple((int(a), int(b)) for a, b in found))
