"""Exact counting by signed evaluation over the sign-vector cube.

A pairing of order n corresponds to a monomial x_1 ... x_2n in the product

    F(X) = prod_{i=1}^{n} ( sum_k x_k x_{k+d_i} ),    d_i = i + sep_offset,

one factor per label, one summand per legal placement of that label.  The
coefficient of the all-variables monomial equals the ALL_SEQUENCES count
and is extracted by averaging over the cube {-1,+1}^{2n}:

    count = 4^{-n} * sum_X  (prod_j x_j) * F(X).

The sum is walked in reflected Gray order so consecutive vectors differ in
one coordinate; each difference sum then changes by at most two products.
Two symmetries cut the domain: global negation always fixes the signed
term, and negating the even positions fixes it exactly for the orders
where exact-separation pairings exist.  Fixing the top one or two
coordinates to +1 and scaling by 2 or 4 recovers the full sum.

Totals can exceed machine words, so shards accumulate residues modulo a
set of word-sized primes whose product provably exceeds twice the largest
possible magnitude; the integer is recovered by the Chinese remainder
theorem.  Shards are independent jobs (a fixed prefix of high
coordinates), safe to run on separate machines and merge later.  Each job
result carries a checksum folded over its full final state, so silently
corrupted duplicate runs are detectable.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .core import (CapacityError, CountMode, PairingError, Variant,
                   existence)

NAIVE_LIMIT = 10

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class MergeError(PairingError):
    """Job results do not assemble into a complete run."""


class DuplicateMismatchError(MergeError):
    """Two runs of the same job disagree; a third run is needed."""


class ConsistencyError(PairingError):
    """A reconstructed total failed an internal cross-check."""


# ------------------------------------------------------------ sign vectors

@dataclass(frozen=True)
class SignVector:
    """Assignment of -1/+1 to x_1..x_2n; bit j set means x_{j+1} = -1."""

    n: int
    bits: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("order must be positive")
        if not 0 <= self.bits < 1 << (2 * self.n):
            raise ValueError("bits outside the 2n-bit range")

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "SignVector":
        if len(values) % 2 or not values:
            raise ValueError("need 2n values")
        bits = 0
        for j, v in enumerate(values):
            if v == -1:
                bits |= 1 << j
            elif v != 1:
                raise ValueError("values must be -1 or +1")
        return cls(len(values) // 2, bits)

    def values(self) -> tuple:
        return tuple(-1 if (self.bits >> j) & 1 else 1
                     for j in range(2 * self.n))

    @property
    def sign(self) -> int:
        """Product of all coordinates."""
        return -1 if bin(self.bits).count("1") % 2 else 1

    def negate(self) -> "SignVector":
        return SignVector(self.n, self.bits ^ ((1 << (2 * self.n)) - 1))

    def reverse(self) -> "SignVector":
        b = 0
        for j in range(2 * self.n):
            if (self.bits >> j) & 1:
                b |= 1 << (2 * self.n - 1 - j)
        return SignVector(self.n, b)

    def negate_even_positions(self) -> "SignVector":
        """Flip x at even 1-based positions (odd 0-based bit indexes)."""
        mask = 0
        for j in range(1, 2 * self.n, 2):
            mask |= 1 << j
        return SignVector(self.n, self.bits ^ mask)


def poly_eval(variant: Variant, vec: SignVector) -> int:
    """Product of the difference sums at this sign assignment."""
    x = vec.values()
    n2 = 2 * vec.n
    total = 1
    for i in range(1, vec.n + 1):
        d = i + variant.sep_offset
        s = 0
        for k in range(n2 - d):
            s += x[k] * x[k + d]
        if s == 0:
            return 0
        total *= s
    return total


def signed_term(variant: Variant, vec: SignVector) -> int:
    """Contribution of this vector to the cube sum."""
    return vec.sign * poly_eval(variant, vec)


class GrayState:
    """Incrementally maintained difference sums along single-bit flips.

    The walk invariant: flipping coordinate j changes s_i by
    -2 x_j (x_{j-d} + x_{j+d}) with out-of-range partners dropped, and
    every s_i keeps the parity of its term count.
    """

    __slots__ = ("variant", "n", "x", "sums", "sign")

    def __init__(self, variant: Variant, n: int, bits: int = 0):
        self.variant = variant
        self.n = n
        vec = SignVector(n, bits)
        self.x = list(vec.values())
        self.sums = self.recompute()
        self.sign = vec.sign

    def recompute(self) -> list:
        """Difference sums from scratch; the incremental values must match."""
        n2 = 2 * self.n
        out = []
        for i in range(1, self.n + 1):
            d = i + self.variant.sep_offset
            out.append(sum(self.x[k] * self.x[k + d] for k in range(n2 - d)))
        return out

    def flip(self, j: int) -> None:
        n2 = 2 * self.n
        if not 0 <= j < n2:
            raise ValueError("coordinate out of range")
        xj = self.x[j]
        for i in range(self.n):
            d = i + 1 + self.variant.sep_offset
            t = self.x[j - d] if j - d >= 0 else 0
            if j + d < n2:
                t += self.x[j + d]
            if t:
                self.sums[i] -= 2 * xj * t
        self.x[j] = -xj
        self.sign = -self.sign

    def value(self) -> int:
        p = 1
        for s in self.sums:
            if s == 0:
                return 0
            p *= s
        return p

    def signed_value(self) -> int:
        return self.sign * self.value()

    @property
    def vector(self) -> SignVector:
        bits = 0
        for j, v in enumerate(self.x):
            if v == -1:
                bits |= 1 << j
        return SignVector(self.n, bits)


# ------------------------------------------------------- direct evaluation

def count_naive(variant: Variant, n: int,
                mode: CountMode = CountMode.UP_TO_REFLECTION) -> int:
    """Evaluate every cube vector from scratch; no Gray walk, no symmetry.

    Exponential in memory and time, guarded to n <= NAIVE_LIMIT.  Exists
    as an independent oracle for the incremental walk.
    """
    if n < 1:
        raise ValueError("order must be positive")
    if n > NAIVE_LIMIT:
        raise CapacityError(
            "direct evaluation is guarded to n <= %d" % NAIVE_LIMIT)
    n2 = 2 * n
    size = 1 << n2
    idx = np.arange(size, dtype=np.uint64)
    x = np.empty((size, n2), dtype=np.int8)
    parity = np.zeros(size, dtype=np.int8)
    for j in range(n2):
        bit = ((idx >> np.uint64(j)) & np.uint64(1)).astype(np.int8)
        x[:, j] = 1 - 2 * bit
        parity ^= bit
    total_sign = 1 - 2 * parity.astype(np.int64)
    prod = np.ones(size, dtype=np.int64)
    for i in range(1, n + 1):
        d = i + variant.sep_offset
        s = np.zeros(size, dtype=np.int64)
        for k in range(n2 - d):
            s += x[:, k].astype(np.int64) * x[:, k + d]
        prod *= s
    total = int(np.sum(total_sign * prod))
    if total % (1 << n2):
        raise ConsistencyError("cube sum not divisible by 4^n")
    count = total >> n2
    if mode is CountMode.ALL_SEQUENCES or n == 1:
        return count
    if count % 2:
        raise ConsistencyError("sequence total is odd for n > 1")
    return count // 2


# ----------------------------------------------------------------- moduli

def _is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if m < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if m % p == 0:
            return m == p
    d = m - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        y = pow(a, d, m)
        if y in (1, m - 1):
            continue
        for _ in range(r - 1):
            y = y * y % m
            if y == m - 1:
                break
        else:
            return False
    return True


def word_primes(count: int, skip: int = 0) -> tuple:
    """The largest `count` primes below 2^31, descending, after skipping."""
    out = []
    m = (1 << 31) - 1
    while len(out) < count + skip:
        if _is_prime(m):
            out.append(m)
        m -= 2
    return tuple(out[skip:])


def magnitude_bound(variant: Variant, n: int) -> int:
    """Upper bound (with 2x headroom) on any signed cube total."""
    max_f = math.prod(2 * n - i - variant.sep_offset for i in range(1, n + 1))
    return 2 * (1 << (2 * n)) * max(max_f, 1)


@dataclass(frozen=True)
class ModulusSet:
    """Distinct word-sized primes used for residue accumulation."""

    moduli: tuple

    def __post_init__(self):
        if not self.moduli:
            raise ValueError("need at least one modulus")
        if len(set(self.moduli)) != len(self.moduli):
            raise ValueError("moduli must be distinct")
        for m in self.moduli:
            if not 2 < m < (1 << 31):
                raise ValueError("modulus %d outside (2, 2^31)" % m)
            if not _is_prime(m):
                raise ValueError("modulus %d is not prime" % m)

    @classmethod
    def for_problem(cls, variant: Variant, n: int, skip: int = 0,
                    min_count: int = 4) -> "ModulusSet":
        """Enough of the largest sub-2^31 primes for this order.

        skip > 0 selects the next primes down instead, giving disjoint
        sets for cross-checking reconstructions.
        """
        bound = magnitude_bound(variant, n)
        count = max(min_count, 1)
        while True:
            ms = word_primes(count, skip)
            if math.prod(ms) > bound:
                return cls(ms)
            count += 1

    def product(self) -> int:
        return math.prod(self.moduli)

    def sufficient_for(self, variant: Variant, n: int) -> bool:
        return self.product() > magnitude_bound(variant, n)


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Unique integer in [0, prod moduli) with the given residues."""
    total = 0
    product = math.prod(moduli)
    for r, m in zip(residues, moduli):
        part = product // m
        total += r * part * pow(part, -1, m)
    return total % product


# -------------------------------------------------------------- symmetries

def symmetry_reduction(variant: Variant, n: int) -> tuple:
    """(fixed top coordinates, multiplier) valid for this problem.

    Negation is always usable.  Negating even positions additionally
    preserves the signed term for exact-separation orders 0,1 mod 4;
    combining both lets the top two coordinates be pinned to +1.
    """
    if variant is Variant.SKOLEM and n % 4 in (0, 1) and n > 1:
        return 2, 4
    return 1, 2


@dataclass(frozen=True)
class SymmetryReport:
    variant: Variant
    n: int
    samples: int
    negation_violations: int
    reversal_violations: int
    even_negation_applicable: bool
    even_negation_violations: int
    witnesses: tuple

    @property
    def ok(self) -> bool:
        return not (self.negation_violations or self.reversal_violations
                    or self.even_negation_violations)


def check_symmetry_lemmas(variant: Variant, n: int, samples: int = 1000,
                          seed: int = 0) -> SymmetryReport:
    """Sample random sign vectors and test each symmetry identity.

    Negation and reversal must preserve the signed term for every variant
    and order.  Even-position negation is only an identity where the
    reduction claims it; elsewhere it is skipped, not counted against.
    """
    rng = Random(seed)
    even_ok = symmetry_reduction(variant, n)[0] == 2
    neg_bad = rev_bad = even_bad = 0
    witnesses = []
    for _ in range(samples):
        vec = SignVector(n, rng.getrandbits(2 * n))
        base = signed_term(variant, vec)
        if signed_term(variant, vec.negate()) != base:
            neg_bad += 1
            witnesses.append(("negation", vec.bits))
        if signed_term(variant, vec.reverse()) != base:
            rev_bad += 1
            witnesses.append(("reversal", vec.bits))
        if even_ok and signed_term(variant,
                                   vec.negate_even_positions()) != base:
            even_bad += 1
            witnesses.append(("even-negation", vec.bits))
    return SymmetryReport(variant, n, samples, neg_bad, rev_bad, even_ok,
                          even_bad, tuple(witnesses[:10]))


# ------------------------------------------------------------------- jobs

@dataclass(frozen=True)
class JobSpec:
    """One shard of the cube sum: fixed top prefix, Gray walk below it.

    prefix_value's most significant bit lands on the highest coordinate
    under the symmetry-fixed ones.  sym_bits defaults to the standard
    reduction for the problem; overriding it is for tests that need the
    raw unreduced sum.
    """

    variant: Variant
    n: int
    mode: CountMode
    prefix_bits: int
    prefix_value: int
    moduli: ModulusSet
    sym_bits: int = field(default=-1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("order must be positive")
        if self.sym_bits == -1:
            object.__setattr__(self, "sym_bits",
                               symmetry_reduction(self.variant, self.n)[0])
        if not 0 <= self.sym_bits <= 2:
            raise ValueError("sym_bits must be 0, 1 or 2")
        if self.prefix_bits < 0:
            raise ValueError("prefix_bits must be nonnegative")
        if self.sym_bits + self.prefix_bits > 2 * self.n:
            raise ValueError("prefix wider than the free coordinate range")
        if not 0 <= self.prefix_value < (1 << self.prefix_bits):
            raise ValueError("prefix_value outside its bit width")

    @property
    def multiplier(self) -> int:
        return 1 << self.sym_bits

    @property
    def free_bits(self) -> int:
        return 2 * self.n - self.sym_bits - self.prefix_bits

    def run_key(self) -> tuple:
        """Everything that identifies the computation, not the outcome."""
        return (self.variant, self.n, self.mode, self.sym_bits,
                self.prefix_bits, self.prefix_value, self.moduli.moduli)


@dataclass(frozen=True)
class JobResult:
    spec: JobSpec
    residues: tuple
    steps: int
    checksum: str


@dataclass(frozen=True)
class MergedResidues:
    variant: Variant
    n: int
    mode: CountMode
    sym_bits: int
    moduli: ModulusSet
    residues: tuple
    steps: int
    jobs: int


def _fnv1a(text: str) -> str:
    h = _FNV_OFFSET
    for b in text.encode():
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return format(h, "016x")


def _checksum(spec: JobSpec, residues, steps, final_sums) -> str:
    parts = [spec.variant.value, str(spec.n), spec.mode.value,
             str(spec.sym_bits), str(spec.prefix_bits),
             str(spec.prefix_value),
             ",".join(str(m) for m in spec.moduli.moduli),
             ",".join(str(r) for r in residues), str(steps),
             ",".join(str(s) for s in final_sums)]
    return _fnv1a("|".join(parts))


def count_gray(spec: JobSpec) -> JobResult:
    """Run one shard to completion.  Atomic: no partial results."""
    residues, steps, final_sums = _kernels.impl.gray_job(
        spec.n, spec.variant.sep_offset, spec.sym_bits, spec.prefix_bits,
        spec.prefix_value, tuple(spec.moduli.moduli))
    return JobResult(spec, tuple(residues), steps,
                     _checksum(spec, residues, steps, final_sums))


def partition(variant: Variant, n: int,
              mode: CountMode = CountMode.UP_TO_REFLECTION,
              num_jobs: int = 1,
              moduli: Optional[ModulusSet] = None) -> list:
    """Split the reduced cube into num_jobs equal shards.

    num_jobs must be a power of two no larger than the reduced domain.
    The shards cover prefix values 0..num_jobs-1 exactly once.
    """
    if num_jobs < 1 or num_jobs & (num_jobs - 1):
        raise ValueError("num_jobs must be a power of two")
    sym = symmetry_reduction(variant, n)[0]
    bits = num_jobs.bit_length() - 1
    if bits > 2 * n - sym:
        raise ValueError("num_jobs exceeds the reduced domain")
    if moduli is None:
        moduli = ModulusSet.for_problem(variant, n)
    if not moduli.sufficient_for(variant, n):
        raise CapacityError(
            "modulus product cannot certify totals at order %d" % n)
    return [JobSpec(variant, n, mode, bits, v, moduli)
            for v in range(num_jobs)]


def merge(results: Iterable[JobResult]) -> MergedResidues:
    """Combine shard results; validate coverage and duplicate agreement.

    Duplicates of a shard must agree exactly.  Two conflicting copies are
    unresolvable (DuplicateMismatchError asks for a third run); with three
    or more, the majority outcome wins.
    """
    results = list(results)
    if not results:
        raise MergeError("no results to merge")
    head = results[0].spec
    frame = (head.variant, head.n, head.mode, head.sym_bits,
             head.prefix_bits, head.moduli.moduli)
    groups = {}
    for res in results:
        s = res.spec
        if (s.variant, s.n, s.mode, s.sym_bits, s.prefix_bits,
                s.moduli.moduli) != frame:
            raise MergeError("results come from different partitions")
        groups.setdefault(s.prefix_value, []).append(res)

    expected = set(range(1 << head.prefix_bits))
    missing = expected - set(groups)
    if missing:
        raise MergeError(
            "incomplete coverage; missing prefix values %s"
            % sorted(missing)[:8])
    extra = set(groups) - expected
    if extra:
        raise MergeError(
            "prefix values outside the partition: %s" % sorted(extra)[:8])

    chosen = {}
    for value, copies in sorted(groups.items()):
        outcomes = {}
        for res in copies:
            key = (res.residues, res.steps, res.checksum)
            outcomes.setdefault(key, []).append(res)
        if len(outcomes) == 1:
            chosen[value] = copies[0]
            continue
        best = max(outcomes.values(), key=len)
        ties = [o for o in outcomes.values() if len(o) == len(best)]
        if len(ties) > 1:
            raise DuplicateMismatchError(
                "job with prefix value %d has %d disagreeing runs and no "
                "majority; run it again" % (value, len(copies)))
        chosen[value] = best[0]

    moduli = head.moduli
    residues = [0] * len(moduli.moduli)
    steps = 0
    for value in sorted(chosen):
        res = chosen[value]
        for t, m in enumerate(moduli.moduli):
            residues[t] = (residues[t] + res.residues[t]) % m
        steps += res.steps
    return MergedResidues(head.variant, head.n, head.mode, head.sym_bits,
                          moduli, tuple(residues), steps, len(chosen))


def finalize(merged: MergedResidues,
             mode: Optional[CountMode] = None) -> int:
    """Reconstruct the exact count from merged residues.

    Applies the symmetry multiplier and the 4^{-n} normalization in each
    modulus, recombines by CRT, then resolves the counting mode.
    """
    if mode is None:
        mode = merged.mode
    variant, n = merged.variant, merged.n
    if not merged.moduli.sufficient_for(variant, n):
        raise CapacityError(
            "modulus product too small to certify order %d" % n)
    mult = 1 << merged.sym_bits
    counts = []
    for r, m in zip(merged.residues, merged.moduli.moduli):
        inv = pow(pow(2, 2 * n, m), -1, m)
        counts.append(r * mult % m * inv % m)
    total = crt(counts, merged.moduli.moduli)
    if total > magnitude_bound(variant, n) // 2:
        raise ConsistencyError(
            "reconstructed total %d exceeds its magnitude bound" % total)
    if not existence(variant, n) and total != 0:
        raise ConsistencyError(
            "nonzero count %d at an order with no pairings" % total)
    if mode is CountMode.ALL_SEQUENCES or n == 1:
        return total
    if total % 2:
        raise ConsistencyError(
            "sequence total %d is odd for n > 1; reflection pairing broken"
            % total)
    return total // 2


def count_algebraic(variant: Variant, n: int,
                    mode: CountMode = CountMode.UP_TO_REFLECTION,
                    num_jobs: int = 1, threads: int = 1,
                    moduli: Optional[ModulusSet] = None,
                    duplicate: bool = False) -> int:
    """Full pipeline: partition, run every shard, merge, reconstruct.

    threads > 1 runs shards concurrently (the compiled kernel releases
    the interpreter lock).  duplicate=True runs every shard twice and
    fails loudly if any pair of runs disagrees.
    """
    specs = partition(variant, n, mode, num_jobs, moduli)
    work = specs * 2 if duplicate else specs
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(count_gray, work))
    else:
        results = [count_gray(spec) for spec in work]
    return finalize(merge(results))


# ------------------------------------------------------------- job files

_JOB_MAGIC = "pairings-job v1"
_RESULT_MAGIC = "pairings-result v1"


def _parse_kv(lines, want):
    fields = {}
    for ln in lines:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        m = re.fullmatch(r"([a-z_]+):\s*(\S.*?)\s*", ln)
        if not m:
            raise ValueError("malformed line %r" % ln)
        key, val = m.groups()
        if key not in want:
            raise ValueError("unknown field %r" % key)
        if key in fields:
            raise ValueError("duplicate field %r" % key)
        fields[key] = val
    missing = [k for k in want if k not in fields]
    if missing:
        raise ValueError("missing fields: %s" % ", ".join(missing))
    return fields


def _spec_fields(fields) -> JobSpec:
    variant = Variant.from_string(fields["variant"])
    n = int(fields["n"])
    mode = CountMode.from_string(fields["mode"])
    moduli = ModulusSet(tuple(int(v) for v in fields["moduli"].split(",")))
    return JobSpec(variant, n, mode, int(fields["prefix_bits"]),
                   int(fields["prefix_value"]), moduli)


def _spec_lines(spec: JobSpec) -> list:
    if spec.sym_bits != symmetry_reduction(spec.variant, spec.n)[0]:
        raise ValueError(
            "only the standard symmetry reduction is representable in files")
    return [
        "variant: %s" % spec.variant.value,
        "n: %d" % spec.n,
        "mode: %s" % spec.mode.value,
        "prefix_bits: %d" % spec.prefix_bits,
        "prefix_value: %d" % spec.prefix_value,
        "moduli: %s" % ",".join(str(m) for m in spec.moduli.moduli),
    ]


def write_job_file(spec: JobSpec, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join([_JOB_MAGIC] + _spec_lines(spec)) + "\n")


def read_job_file(path) -> JobSpec:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _JOB_MAGIC:
        raise ValueError("not a job file: missing %r header" % _JOB_MAGIC)
    fields = _parse_kv(lines[1:], ("variant", "n", "mode", "prefix_bits",
                                   "prefix_value", "moduli"))
    return _spec_fields(fields)


def write_result_file(result: JobResult, path) -> None:
    lines = [_RESULT_MAGIC] + _spec_lines(result.spec) + [
        "residues: %s" % ",".join(str(r) for r in result.residues),
        "steps: %d" % result.steps,
        "checksum: %s" % result.checksum,
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_result_file(path) -> JobResult:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _RESULT_MAGIC:
        raise ValueError("not a result file: missing %r header"
                         % _RESULT_MAGIC)
    fields = _parse_kv(lines[1:], ("variant", "n", "mode", "prefix_bits",
                                   "prefix_value", "moduli", "residues",
                                   "steps", "checksum"))
    spec = _spec_fields(fields)
    residues = tuple(int(v) for v in fields["residues"].split(","))
    if len(residues) != len(spec.moduli.moduli):
        raise ValueError("residue count does not match modulus count")
    for r, m in zip(residues, spec.moduli.moduli):
        if not 0 <= r < m:
            raise ValueError("residue %d outside [0, %d)" % (r, m))
    if not re.fullmatch(r"[0-9a-f]{16}", fields["checksum"]):
        raise ValueError("checksum must be 16 hex digits")
    return JobResult(spec, residues, int(fields["steps"]),
                     fields["checksum"])
