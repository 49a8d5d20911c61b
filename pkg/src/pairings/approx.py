"""Monte Carlo estimation of pairing counts by parallel tempering.

Relax the problem: place each label's pair independently, allowing
collisions.  A configuration is one offset per label; its energy is the
number of empty positions, and configurations with energy zero are
exactly the valid pairings (2n placed ends must then cover 2n positions
once each).  With Z(beta) the partition sum of exp(-beta * energy),
Z(0) is the count of all relaxed configurations (a falling-factorial
product) and the zero-temperature limit picks out the valid ones:

    count = Z(0) * prod_j  Z(beta_{j+1}) / Z(beta_j),

telescoped over a ladder 0 = beta_1 < ... < beta_M, where the last factor
is the ground-state fraction at beta_M.  Each ratio is the expectation of
exp(-(beta_{j+1}-beta_j) * E) under level j, estimated by a chain per
level with replica swaps between neighbours so cold chains keep mixing.

Estimates are reproducible: all draws come from named splitmix streams,
so a (seed, ladder, iterations) triple gives the same answer on either
kernel backend, bit for bit.
"""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from . import _kernels
from ._kernels import Stream
from .core import CountMode, PairingError, Variant


class LadderError(PairingError):
    """No acceptable temperature ladder within the level budget."""


PRESET_LADDERS = {
    "n12": (0.0, 0.54, 1.1, 1.69, 2.33, 3.0, 3.73, 4.65, 5.82, 8.1,
            16.0, 32.0),
}


def simplified_count(variant: Variant, n: int) -> int:
    """Number of relaxed configurations: independent placements per label."""
    if n < 1:
        raise ValueError("order must be positive")
    return math.prod(max(2 * n - k - variant.sep_offset, 0)
                     for k in range(1, n + 1))


@dataclass(frozen=True)
class Ladder:
    """Strictly increasing inverse temperatures starting at zero."""

    betas: tuple

    def __post_init__(self):
        if len(self.betas) < 2:
            raise ValueError("a ladder needs at least two levels")
        if self.betas[0] != 0.0:
            raise ValueError("the first level must be beta = 0")
        for a, b in zip(self.betas, self.betas[1:]):
            if not b > a:
                raise ValueError("levels must increase strictly")

    @classmethod
    def preset(cls, name: str) -> "Ladder":
        if name not in PRESET_LADDERS:
            raise ValueError("unknown preset %r; have %s"
                             % (name, ", ".join(sorted(PRESET_LADDERS))))
        return cls(PRESET_LADDERS[name])

    def __len__(self):
        return len(self.betas)


# ------------------------------------------------------------ public moves

class Configuration:
    """Mutable relaxed configuration: one offset per label.

    Offsets are 1-based; label r occupies positions off and
    off + r + sep_offset.  occupancy and energy are cached and kept
    consistent by apply_move.
    """

    __slots__ = ("variant", "n", "offsets", "occupancy", "energy")

    def __init__(self, variant: Variant, n: int, offsets: Sequence[int]):
        if len(offsets) != n:
            raise ValueError("need one offset per label")
        self.variant = variant
        self.n = n
        self.offsets = list(offsets)
        n2 = 2 * n
        for k, off in enumerate(self.offsets):
            if not 1 <= off <= n2 - (k + 1 + variant.sep_offset):
                raise ValueError("offset %d out of range for label %d"
                                 % (off, k + 1))
        self.occupancy = self._fresh_occupancy()
        self.energy = sum(1 for c in self.occupancy if c == 0)

    @classmethod
    def random(cls, variant: Variant, n: int,
               stream: Stream) -> "Configuration":
        n2 = 2 * n
        offsets = [1 + stream.randbound(n2 - (k + 1 + variant.sep_offset))
                   for k in range(n)]
        return cls(variant, n, offsets)

    def _fresh_occupancy(self) -> list:
        occ = [0] * (2 * self.n)
        for k, off in enumerate(self.offsets):
            d = k + 1 + self.variant.sep_offset
            occ[off - 1] += 1
            occ[off - 1 + d] += 1
        return occ

    def recount(self) -> int:
        """Energy recomputed from scratch (does not touch the caches)."""
        return sum(1 for c in self._fresh_occupancy() if c == 0)

    def check(self) -> None:
        occ = self._fresh_occupancy()
        if occ != self.occupancy or self.energy != sum(
                1 for c in occ if c == 0):
            raise AssertionError("cached occupancy diverged")

    def apply_move(self, label: int, new_offset: int) -> int:
        """Move one label's pair; returns the energy change."""
        k = label - 1
        d = label + self.variant.sep_offset
        occ = self.occupancy
        old = self.offsets[k]
        if new_offset == old:
            return 0
        de = 0
        for b in (old - 1, old - 1 + d):
            occ[b] -= 1
            if occ[b] == 0:
                de += 1
        for b in (new_offset - 1, new_offset - 1 + d):
            if occ[b] == 0:
                de -= 1
            occ[b] += 1
        self.offsets[k] = new_offset
        self.energy += de
        return de

    def copy(self) -> "Configuration":
        return Configuration(self.variant, self.n, self.offsets)


def propose(config: Configuration, stream: Stream) -> tuple:
    """Draw (label, new_offset) uniformly, same order as the kernels."""
    k = stream.randbound(config.n)
    d = k + 1 + config.variant.sep_offset
    new = 1 + stream.randbound(2 * config.n - d)
    return k + 1, new


def metropolis_step(config: Configuration, beta: float,
                    stream: Stream) -> bool:
    """One proposal with the standard acceptance rule; returns accepted.

    A raise of the energy by dE survives with probability exp(-beta*dE);
    the uniform draw happens only in that case, matching the kernels'
    stream usage exactly.
    """
    label, new = propose(config, stream)
    old = config.offsets[label - 1]
    de = config.apply_move(label, new)
    if de <= 0 or stream.uniform() < math.exp(-beta * de):
        return True
    config.apply_move(label, old)
    return False


def replica_swap(configs: list, betas: Sequence[float],
                 stream: Stream) -> int:
    """One ascending pass of neighbour swaps; returns swaps performed.

    The pair (j, j+1) swaps with probability
    min(1, exp(-(beta_{j+1}-beta_j) (E_j - E_{j+1}))): certain whenever
    the hotter chain sits at the lower energy.
    """
    swaps = 0
    for j in range(len(configs) - 1):
        diff = configs[j].energy - configs[j + 1].energy
        if diff <= 0 or stream.uniform() < math.exp(
                -(betas[j + 1] - betas[j]) * diff):
            configs[j], configs[j + 1] = configs[j + 1], configs[j]
            swaps += 1
    return swaps


# -------------------------------------------------------------- estimation

@dataclass(frozen=True)
class LevelStats:
    beta: float
    move_rate: float
    swap_rate: Optional[float]
    mean_energy: float
    ratio: float
    ratio_se: float


@dataclass(frozen=True)
class EstimateReport:
    variant: Variant
    n: int
    mode: CountMode
    seed: int
    iterations: int
    burn_in: int
    levels: tuple
    simplified: int
    ground_hits: int
    estimate: float

    def render(self) -> str:
        rows = ["  i      beta       W1       W2      E[e]        ratio"]
        for i, lv in enumerate(self.levels, start=1):
            w2 = "    -   " if lv.swap_rate is None else "%8.4f" % lv.swap_rate
            rows.append("%3d  %8.4f %8.4f %s %9.4f %12.6g"
                        % (i, lv.beta, lv.move_rate, w2, lv.mean_energy,
                           lv.ratio))
        rows.append("relaxed configurations: %d" % self.simplified)
        rows.append("ground-state hits: %d of %d"
                    % (self.ground_hits, self.iterations))
        rows.append("estimate: %.6g" % self.estimate)
        return "\n".join(rows)


def default_burn_in(iterations: int) -> int:
    return iterations // 16


def estimate(variant: Variant, n: int, ladder: Optional[Ladder] = None,
             iterations: int = 1 << 20, burn_in: Optional[int] = None,
             seed: int = 0, mode: CountMode = CountMode.UP_TO_REFLECTION,
             check_interval: int = 0) -> EstimateReport:
    """Estimate the pairing count with one tempering run.

    Runs burn_in + iterations sweeps (burn_in defaults to a sixteenth);
    each sweep records the ratio observables, then one proposal per
    level, then one swap pass.  ladder=None builds one for the problem,
    which costs pilot runs; pass a Ladder to make runs reproducible.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    if burn_in is None:
        burn_in = default_burn_in(iterations)
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    simplified = simplified_count(variant, n)
    if simplified == 0:
        warnings.warn("no relaxed configurations at order %d; estimate is 0"
                      % n)
        ladder = ladder or Ladder((0.0, 1.0))
        levels = tuple(LevelStats(b, 0.0, None if j == len(ladder) - 1
                                  else 0.0, 0.0, 0.0, 0.0)
                       for j, b in enumerate(ladder.betas))
        return EstimateReport(variant, n, mode, seed, iterations, burn_in,
                              levels, 0, 0, 0.0)
    if ladder is None:
        ladder = build_ladder(variant, n, seed=seed)

    out = _kernels.impl.pt_run(n, variant.sep_offset, list(ladder.betas),
                               iterations, burn_in, seed, check_interval)
    measured = out["measured"]
    mlev = len(ladder)
    levels = []
    product = 1.0
    for j in range(mlev):
        mean = out["ratio_sum"][j] / measured
        var = max(out["ratio_sq"][j] / measured - mean * mean, 0.0)
        se = math.sqrt(var / measured)
        product *= mean
        levels.append(LevelStats(
            beta=ladder.betas[j],
            move_rate=out["accepts"][j] / measured,
            swap_rate=(out["swap_accepts"][j] / measured
                       if j < mlev - 1 else None),
            mean_energy=out["energy_sum"][j] / measured,
            ratio=mean,
            ratio_se=se,
        ))
    ground_hits = round(out["ratio_sum"][mlev - 1])
    value = simplified * product
    if mode is CountMode.UP_TO_REFLECTION and n > 1:
        value /= 2
    if ground_hits == 0:
        warnings.warn("no ground-state samples at the coldest level; "
                      "the estimate degenerates to 0")
    return EstimateReport(variant, n, mode, seed, iterations, burn_in,
                          tuple(levels), simplified, ground_hits, value)


@dataclass(frozen=True)
class RepeatReport:
    reports: tuple
    estimates: tuple
    mean: float
    median: float
    std: float


def repeat_and_average(variant: Variant, n: int, ladder: Ladder,
                       iterations: int = 1 << 20, runs: int = 5,
                       seed: int = 0,
                       mode: CountMode = CountMode.UP_TO_REFLECTION,
                       burn_in: Optional[int] = None) -> RepeatReport:
    """Independent runs under seeds seed..seed+runs-1, pooled."""
    if runs < 1:
        raise ValueError("runs must be positive")
    reports = tuple(estimate(variant, n, ladder, iterations, burn_in,
                             seed + i, mode) for i in range(runs))
    values = tuple(r.estimate for r in reports)
    return RepeatReport(
        reports, values, statistics.fmean(values),
        statistics.median(values),
        statistics.stdev(values) if runs > 1 else 0.0)


# ------------------------------------------------------------------ ladder

def _pilot_histogram(variant, n, beta, sweeps, seed, tag, start):
    hist, _, final, _, samples = _kernels.impl.single_chain(
        n, variant.sep_offset, beta, sweeps, sweeps // 4, 1, seed, tag,
        False, start)
    probs = [h / samples for h in hist]
    return probs, final


def _swap_estimate(pa, pb, dbeta) -> float:
    """Expected swap acceptance between independent level histograms."""
    total = 0.0
    for ea, qa in enumerate(pa):
        if qa == 0.0:
            continue
        for eb, qb in enumerate(pb):
            if qb == 0.0:
                continue
            diff = ea - eb
            total += qa * qb * (1.0 if diff <= 0
                                else math.exp(-dbeta * diff))
    return total


def build_ladder(variant: Variant, n: int, target_swap: float = 0.5,
                 beta_max: float = 32.0, max_levels: int = 24,
                 pilot_sweeps: int = 1 << 14, seed: int = 0) -> Ladder:
    """Grow a ladder from 0 so adjacent swap acceptance stays near target.

    Each candidate level is judged from short pilot chains: the swap
    acceptance between two levels is predicted from their independent
    energy histograms.  Step sizes double while acceptable, then bisect
    onto the largest acceptable step.  The ladder ends at beta_max, a
    quench deep enough that only ground states carry weight.
    """
    if not 0.0 < target_swap < 1.0:
        raise ValueError("target_swap must be inside (0, 1)")
    if beta_max <= 0:
        raise ValueError("beta_max must be positive")
    if simplified_count(variant, n) == 0:
        raise LadderError("no relaxed configurations at order %d" % n)

    tag = [0]

    def pilot(beta, start):
        tag[0] += 1
        return _pilot_histogram(variant, n, beta, pilot_sweeps, seed,
                                tag[0], start)

    betas = [0.0]
    hist, cfg = pilot(0.0, None)
    delta = 0.25
    while betas[-1] < beta_max:
        if len(betas) >= max_levels:
            raise LadderError(
                "no ladder within %d levels at target %.2f; last level "
                "%.4f of %.4f" % (max_levels, target_swap, betas[-1],
                                  beta_max))
        base = betas[-1]
        top_hist, top_cfg = pilot(beta_max, cfg)
        if _swap_estimate(hist, top_hist, beta_max - base) >= target_swap:
            betas.append(beta_max)
            break
        good = None
        lo = 0.0
        while base + delta < beta_max:
            cand_hist, cand_cfg = pilot(base + delta, cfg)
            if _swap_estimate(hist, cand_hist, delta) < target_swap:
                break
            lo, good = delta, (cand_hist, cand_cfg)
            delta *= 2
        hi = min(delta, beta_max - base)
        for _ in range(6):
            mid = (lo + hi) / 2
            cand_hist, cand_cfg = pilot(base + mid, cfg)
            if _swap_estimate(hist, cand_hist, mid) >= target_swap:
                lo, good = mid, (cand_hist, cand_cfg)
            else:
                hi = mid
        if good is None:
            lo, good = hi, pilot(base + hi, cfg)
        betas.append(base + lo)
        hist, cfg = good
        delta = max(lo, 1e-3)
    return Ladder(tuple(betas))
