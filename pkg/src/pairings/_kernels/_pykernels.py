"""Pure-Python kernels: reference implementations of every hot loop.

Each function here has a compiled twin in _ckernels.  The two must agree
exactly: integer results are equal, floating-point accumulators match bit
for bit (same operations in the same order, same stream of random draws).
The pure versions are written for clarity first and locality second; they
are the fallback when the extension is unavailable and the oracle the
extension is tested against.

Conventions shared by both backends:

* positions and bins are 0-based internally,
* sign vectors are bitmasks over 2n bits, bit j set means x_{j+1} = -1,
* difference i (1-based label i) separates positions by i + sep_off,
* tempering chains draw from per-level streams (tag j+1), swap decisions
  from the tag-0 stream, so results do not depend on scheduling.
"""

from __future__ import annotations

import math

from ._rng import Stream

# largest signed-64 magnitude an accumulator may reach before reduction
_ACC_LIMIT = 1 << 62


# ---------------------------------------------------------------- backtrack

def backtrack_count(n: int, sep_off: int) -> int:
    """Count complete placements of labels n..1, positions left to right."""
    n2 = 2 * n

    def place(r: int, occ: int) -> int:
        if r == 0:
            return 1
        sep = r + sep_off
        total = 0
        for a in range(n2 - sep):
            m = (1 << a) | (1 << (a + sep))
            if not occ & m:
                total += place(r - 1, occ | m)
        return total

    return place(n, 0)


def backtrack_enumerate(n: int, sep_off: int, callback) -> int:
    """Like backtrack_count but invokes callback(labels) at every leaf.

    labels is a fresh list of 2n ints.  Leaves are visited in the
    deterministic search order: larger labels placed first, positions
    scanned left to right.
    """
    n2 = 2 * n
    labels = [0] * n2

    def place(r: int, occ: int) -> int:
        if r == 0:
            callback(list(labels))
            return 1
        sep = r + sep_off
        total = 0
        for a in range(n2 - sep):
            m = (1 << a) | (1 << (a + sep))
            if not occ & m:
                labels[a] = labels[a + sep] = r
                total += place(r - 1, occ | m)
                labels[a] = labels[a + sep] = 0
        return total

    return place(n, 0)


# ---------------------------------------------------------------- gray walk

def _diff_sums(n: int, sep_off: int, x: list) -> list:
    """Difference sums s_i = sum_k x_k x_{k+d} from scratch, d = i+1+sep_off."""
    n2 = 2 * n
    sums = []
    for i in range(n):
        d = i + 1 + sep_off
        sums.append(sum(x[k] * x[k + d] for k in range(n2 - d)))
    return sums


def gray_job(n, sep_off, sym_bits, prefix_bits, prefix_value, moduli):
    """Signed sum of the difference-sum product over one shard of the cube.

    The shard fixes the sym_bits highest variables to +1 and the next
    prefix_bits below them to the bits of prefix_value (most significant
    bit at the highest position).  The remaining low f bits are walked in
    reflected Gray order, so each step flips one variable and updates each
    difference sum through at most two products.

    Returns (residues, steps, final_sums): the signed total reduced into
    each modulus, the number of states visited (2**f), and the difference
    sums of the last state visited.  The pure backend also carries the
    exact integer total internally, which makes it an independent check on
    the compiled backend's chunked modular arithmetic.
    """
    n2 = 2 * n
    f = n2 - sym_bits - prefix_bits
    if f < 0:
        raise ValueError("prefix wider than the free variable range")
    x = [1] * n2
    for i in range(prefix_bits):
        if (prefix_value >> (prefix_bits - 1 - i)) & 1:
            x[n2 - sym_bits - 1 - i] = -1
    sign = -1 if bin(prefix_value).count("1") % 2 else 1
    sums = _diff_sums(n, sep_off, x)

    # neighbours touched when bit j flips: for each difference d the
    # partners x_{j-d} and x_{j+d} that fall inside the range
    nbr = []
    for j in range(f):
        row = []
        for i in range(n):
            d = i + 1 + sep_off
            a = j - d if j - d >= 0 else -1
            b = j + d if j + d < n2 else -1
            if a >= 0 or b >= 0:
                row.append((i, a, b))
        nbr.append(row)

    total = 0
    p = 1
    for v in sums:
        p *= v
    total += sign * p

    for m in range(1, 1 << f):
        j = (m & -m).bit_length() - 1
        xj = x[j]
        for i, a, b in nbr[j]:
            t = x[a] if a >= 0 else 0
            if b >= 0:
                t += x[b]
            if t:
                sums[i] -= 2 * xj * t
        x[j] = -xj
        sign = -sign
        p = 1
        for v in sums:
            if v == 0:
                p = 0
                break
            p *= v
        if p:
            total += sign * p

    residues = [total % mod for mod in moduli]
    return residues, 1 << f, list(sums)


# ----------------------------------------------------------------- sampling

def _init_offsets(n: int, sep_off: int, stream: Stream) -> list:
    """Independent uniform offset per label; offset is 1-based."""
    n2 = 2 * n
    return [1 + stream.randbound(n2 - (k + 1 + sep_off)) for k in range(n)]


def _occupancy(n: int, sep_off: int, offsets: list) -> list:
    occ = [0] * (2 * n)
    for k, off in enumerate(offsets):
        occ[off - 1] += 1
        occ[off - 1 + k + 1 + sep_off] += 1
    return occ


def _energy(occ: list) -> int:
    return sum(1 for c in occ if c == 0)


def _sweep_move(n, sep_off, n2, offsets, occ, energy, beta, acc_table, stream):
    """One proposal: pick a label, pick a fresh offset, Metropolis accept.

    Returns (energy, accepted).  The acceptance draw happens only when the
    move raises the energy, and the occupancy is patched first so the
    energy change costs O(1); a rejected move is patched back.
    """
    k = stream.randbound(n)
    d = k + 1 + sep_off
    new = 1 + stream.randbound(n2 - d)
    old = offsets[k]
    if new == old:
        return energy, True
    de = 0
    for b in (old - 1, old - 1 + d):
        occ[b] -= 1
        if occ[b] == 0:
            de += 1
    for b in (new - 1, new - 1 + d):
        if occ[b] == 0:
            de -= 1
        occ[b] += 1
    if de <= 0 or stream.uniform() < acc_table[de]:
        offsets[k] = new
        return energy + de, True
    for b in (new - 1, new - 1 + d):
        occ[b] -= 1
    for b in (old - 1, old - 1 + d):
        occ[b] += 1
    return energy, False


def pt_run(n, sep_off, betas, iterations, burn_in, seed, check_interval=0):
    """Parallel tempering over the given temperature ladder.

    Runs burn_in + iterations sweeps.  Each sweep records the per-level
    ratio observables (post burn-in), then makes one Metropolis proposal
    per level, then attempts one swap per adjacent pair in ascending
    order.  check_interval > 0 recomputes every chain's occupancy and
    energy from scratch that often and raises if a cached value drifted.

    Returns a dict of plain accumulators; see the caller for the estimate
    assembled from them.
    """
    n2 = 2 * n
    mlev = len(betas)
    acc_tables = [[math.exp(-b * e) for e in range(n2 + 1)] for b in betas]
    ratio_tables = [
        [math.exp(-(betas[j + 1] - betas[j]) * e) for e in range(n2 + 1)]
        for j in range(mlev - 1)
    ]
    swap_tables = ratio_tables  # same exponent scale per adjacent pair

    chains = [Stream(seed, j + 1) for j in range(mlev)]
    swap_stream = Stream(seed, 0)
    offsets = [_init_offsets(n, sep_off, chains[j]) for j in range(mlev)]
    occ = [_occupancy(n, sep_off, offsets[j]) for j in range(mlev)]
    energy = [_energy(occ[j]) for j in range(mlev)]

    ratio_sum = [0.0] * mlev
    ratio_sq = [0.0] * mlev
    accepts = [0] * mlev
    swap_accepts = [0] * mlev
    energy_sum = [0] * mlev
    measured = 0

    total = burn_in + iterations
    for t in range(total):
        measuring = t >= burn_in
        if measuring:
            measured += 1
            for j in range(mlev - 1):
                r = ratio_tables[j][energy[j]]
                ratio_sum[j] += r
                ratio_sq[j] += r * r
            top = 1.0 if energy[mlev - 1] == 0 else 0.0
            ratio_sum[mlev - 1] += top
            ratio_sq[mlev - 1] += top
            for j in range(mlev):
                energy_sum[j] += energy[j]
        for j in range(mlev):
            energy[j], ok = _sweep_move(
                n, sep_off, n2, offsets[j], occ[j], energy[j],
                betas[j], acc_tables[j], chains[j])
            if measuring and ok:
                accepts[j] += 1
        for j in range(mlev - 1):
            diff = energy[j] - energy[j + 1]
            if diff <= 0 or swap_stream.uniform() < swap_tables[j][diff]:
                offsets[j], offsets[j + 1] = offsets[j + 1], offsets[j]
                occ[j], occ[j + 1] = occ[j + 1], occ[j]
                energy[j], energy[j + 1] = energy[j + 1], energy[j]
                if measuring:
                    swap_accepts[j] += 1
        if check_interval and (t + 1) % check_interval == 0:
            for j in range(mlev):
                fresh = _occupancy(n, sep_off, offsets[j])
                if fresh != occ[j] or _energy(fresh) != energy[j]:
                    raise AssertionError(
                        "cached occupancy diverged at sweep %d level %d"
                        % (t, j))

    return {
        "ratio_sum": ratio_sum,
        "ratio_sq": ratio_sq,
        "accepts": accepts,
        "swap_accepts": swap_accepts[:-1] if mlev > 1 else [],
        "energy_sum": energy_sum,
        "energies": list(energy),
        "offsets": [list(o) for o in offsets],
        "measured": measured,
    }


def single_chain(n, sep_off, beta, sweeps, burn, thin, seed, tag,
                 collect_visits=False, start_offsets=None):
    """One chain at fixed beta; returns sampled statistics.

    After burn sweeps, every thin-th sweep records the energy histogram
    and, when collect_visits is set, a visit count per configuration
    (offsets encoded in mixed radix, label 1 fastest).  Used for ladder
    pilots and for occupation-frequency tests.
    """
    n2 = 2 * n
    stream = Stream(seed, tag)
    acc_table = [math.exp(-beta * e) for e in range(n2 + 1)]
    if start_offsets is None:
        offsets = _init_offsets(n, sep_off, stream)
    else:
        offsets = list(start_offsets)
    occ = _occupancy(n, sep_off, offsets)
    energy = _energy(occ)

    hist = [0] * (n2 + 1)
    visits = None
    strides = None
    if collect_visits:
        strides = []
        size = 1
        for k in range(n):
            strides.append(size)
            size *= n2 - (k + 1 + sep_off)
        visits = [0] * size

    accepts = 0
    samples = 0
    for t in range(sweeps):
        energy, ok = _sweep_move(n, sep_off, n2, offsets, occ, energy,
                                 beta, acc_table, stream)
        if ok:
            accepts += 1
        if t >= burn and (t - burn) % thin == 0:
            samples += 1
            hist[energy] += 1
            if collect_visits:
                idx = 0
                for k in range(n):
                    idx += (offsets[k] - 1) * strides[k]
                visits[idx] += 1

    return hist, visits, list(offsets), accepts, samples
