"""Seedable 64-bit stream generator shared by samplers and kernels.

The compiled kernel implements the identical update, so a run is
reproducible bit for bit no matter which backend executes it.  Streams for
different tags are independent; tag 0 is reserved for swap decisions, tag
j+1 drives chain level j.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class Stream:
    """splitmix64 stream; state advances by the golden-ratio increment."""

    __slots__ = ("state",)

    def __init__(self, seed: int, tag: int = 0):
        self.state = _mix((seed + GOLDEN * (tag + 1)) & MASK64)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randbound(self, bound: int) -> int:
        """Uniform integer in [0, bound) by the multiply-high reduction."""
        return (self.next_u64() * bound) >> 64
