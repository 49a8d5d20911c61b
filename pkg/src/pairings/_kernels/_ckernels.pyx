# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: backtracking search, Gray walk, tempering sweeps.

Mirrors _pykernels exactly.  Integer results are equal and floating-point
paths perform the same operations in the same order on the same random
stream, so results match the pure backend bit for bit.

The Gray walk cannot carry an arbitrary-precision total, so factors are
grouped into chunks whose product provably fits a signed 64-bit word;
chunks are reduced into each modulus and multiplied there.  Signed
per-modulus accumulators fold in one term per step and are renormalized
whenever they approach the word boundary.
"""

from libc.stdlib cimport calloc, free
from libc.math cimport exp

cdef extern from *:
    """
    #include <stdint.h>
    static inline int pk_ctz64(unsigned long long x) {
        return __builtin_ctzll(x);
    }
    static inline unsigned long long pk_mulhi64(unsigned long long a,
                                                unsigned long long b) {
        return (unsigned long long)(((__uint128_t)a * b) >> 64);
    }
    """
    int pk_ctz64(unsigned long long x) nogil
    unsigned long long pk_mulhi64(unsigned long long a,
                                  unsigned long long b) nogil

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef i64 _ACC_LIMIT = <i64>1 << 62


# ------------------------------------------------------------------ stream

cdef inline u64 _mix(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _stream_init(u64 seed, u64 tag) nogil:
    return _mix(seed + _GOLDEN * (tag + 1))


cdef inline u64 _next_u64(u64* state) nogil:
    state[0] += _GOLDEN
    return _mix(state[0])


cdef inline double _uniform(u64* state) nogil:
    return <double>(_next_u64(state) >> 11) * _INV_2_53


cdef inline u64 _randbound(u64* state, u64 bound) nogil:
    return pk_mulhi64(_next_u64(state), bound)


# --------------------------------------------------------------- backtrack

cdef i64 _bt_count(int r, int sep_off, int n2, u64 occ) noexcept nogil:
    if r == 0:
        return 1
    cdef int sep = r + sep_off
    cdef i64 total = 0
    cdef int a
    cdef u64 m
    for a in range(n2 - sep):
        m = (<u64>1 << a) | (<u64>1 << (a + sep))
        if not occ & m:
            total += _bt_count(r - 1, sep_off, n2, occ | m)
    return total


def backtrack_count(int n, int sep_off):
    """Count complete placements of labels n..1, positions left to right."""
    cdef i64 total
    with nogil:
        total = _bt_count(n, sep_off, 2 * n, 0)
    return total


cdef i64 _bt_enum(int r, int sep_off, int n2, u64 occ, int* lab,
                  object callback) except -1:
    cdef i64 total = 0
    cdef int sep, a, i
    cdef u64 m
    if r == 0:
        callback([lab[i] for i in range(n2)])
        return 1
    sep = r + sep_off
    for a in range(n2 - sep):
        m = (<u64>1 << a) | (<u64>1 << (a + sep))
        if not occ & m:
            lab[a] = r
            lab[a + sep] = r
            total += _bt_enum(r - 1, sep_off, n2, occ | m, lab, callback)
            lab[a] = 0
            lab[a + sep] = 0
    return total


def backtrack_enumerate(int n, int sep_off, callback):
    """Like backtrack_count but invokes callback(labels) at every leaf."""
    cdef int n2 = 2 * n
    cdef int* lab = <int*>calloc(n2, sizeof(int))
    if lab == NULL:
        raise MemoryError
    try:
        return _bt_enum(n, sep_off, n2, 0, lab, callback)
    finally:
        free(lab)


# --------------------------------------------------------------- gray walk

cdef inline void _gray_fold(int n, int nchunks, int* chunk_end, i64* s,
                            int sign, int nm, i64* mods, i64* acc) nogil:
    """Fold the current factor product into every modular accumulator."""
    cdef i64 chunk_val[66]
    cdef i64 p, si, v, cv, mt
    cdef int c, i, t, start
    start = 0
    for c in range(nchunks):
        p = 1
        for i in range(start, chunk_end[c]):
            si = s[i]
            if si == 0:
                return
            p *= si
        chunk_val[c] = p
        start = chunk_end[c]
    for t in range(nm):
        mt = mods[t]
        v = chunk_val[0] % mt
        if v < 0:
            v += mt
        for c in range(1, nchunks):
            cv = chunk_val[c] % mt
            if cv < 0:
                cv += mt
            v = (v * cv) % mt
        if sign > 0:
            acc[t] += v
        else:
            acc[t] -= v
        if acc[t] >= _ACC_LIMIT or acc[t] <= -_ACC_LIMIT:
            acc[t] %= mt


def gray_job(int n, int sep_off, int sym_bits, int prefix_bits,
             u64 prefix_value, moduli):
    """Signed sum of the difference-sum product over one shard of the cube.

    Same contract as the pure backend: returns (residues, steps,
    final_sums) for the shard fixing sym_bits top coordinates to +1 and
    the next prefix_bits to prefix_value.
    """
    cdef int n2 = 2 * n
    cdef int f = n2 - sym_bits - prefix_bits
    if f < 0:
        raise ValueError("prefix wider than the free variable range")
    if f >= 62:
        raise ValueError("shard of 2^%d states is not walkable" % f)
    if n > 64:
        raise ValueError("order too large for the compiled walker")

    cdef int nm = len(moduli)
    cdef int i, j, t, c, dd, xj, pos, sign
    cdef i64 tt

    # chunk boundaries: greedy packing so each product of factor bounds
    # stays under 2^62 (factor i is bounded by the term count of sum i)
    bounds = [n2 - (i + 1 + sep_off) for i in range(n)]
    ends = []
    cur = 1
    for i in range(n):
        if cur > 1 and cur * max(bounds[i], 1) >= (1 << 62):
            ends.append(i)
            cur = 1
        cur *= max(bounds[i], 1)
    ends.append(n)
    cdef int nchunks = len(ends)

    cdef int* x = <int*>calloc(n2, sizeof(int))
    cdef i64* s = <i64*>calloc(n, sizeof(i64))
    cdef int* d = <int*>calloc(n, sizeof(int))
    cdef int* chunk_end = <int*>calloc(nchunks, sizeof(int))
    cdef i64* mods = <i64*>calloc(nm if nm else 1, sizeof(i64))
    cdef i64* acc = <i64*>calloc(nm if nm else 1, sizeof(i64))
    if not (x and s and d and chunk_end and mods and acc):
        free(x); free(s); free(d); free(chunk_end); free(mods); free(acc)
        raise MemoryError

    cdef u64 step, nsteps
    try:
        for i in range(nchunks):
            chunk_end[i] = ends[i]
        for t in range(nm):
            mods[t] = moduli[t]
        for j in range(n2):
            x[j] = 1
        for i in range(prefix_bits):
            if (prefix_value >> (prefix_bits - 1 - i)) & 1:
                x[n2 - sym_bits - 1 - i] = -1
        sign = 1
        for i in range(prefix_bits):
            if (prefix_value >> i) & 1:
                sign = -sign
        for i in range(n):
            d[i] = i + 1 + sep_off
            tt = 0
            for j in range(n2 - d[i]):
                tt += x[j] * x[j + d[i]]
            s[i] = tt

        nsteps = <u64>1 << f
        with nogil:
            _gray_fold(n, nchunks, chunk_end, s, sign, nm, mods, acc)
            for step in range(1, nsteps):
                j = pk_ctz64(step)
                xj = x[j]
                for i in range(n):
                    dd = d[i]
                    tt = 0
                    if j >= dd:
                        tt += x[j - dd]
                    if j + dd < n2:
                        tt += x[j + dd]
                    if tt:
                        s[i] -= 2 * xj * tt
                x[j] = -xj
                sign = -sign
                _gray_fold(n, nchunks, chunk_end, s, sign, nm, mods, acc)

        residues = []
        for t in range(nm):
            tt = acc[t] % mods[t]
            if tt < 0:
                tt += mods[t]
            residues.append(int(tt))
        final_sums = [int(s[i]) for i in range(n)]
        return residues, int(nsteps), final_sums
    finally:
        free(x); free(s); free(d); free(chunk_end); free(mods); free(acc)


# ---------------------------------------------------------------- sampling

cdef inline void _fill_offsets(int n, int sep_off, int n2, u64* state,
                               int* offsets) nogil:
    cdef int k
    for k in range(n):
        offsets[k] = 1 + <int>_randbound(state, <u64>(n2 - (k + 1 + sep_off)))


cdef inline void _fill_occupancy(int n, int sep_off, int n2, int* offsets,
                                 int* occ) nogil:
    cdef int k
    for k in range(n2):
        occ[k] = 0
    for k in range(n):
        occ[offsets[k] - 1] += 1
        occ[offsets[k] - 1 + k + 1 + sep_off] += 1


cdef inline int _count_empty(int n2, int* occ) nogil:
    cdef int k, e = 0
    for k in range(n2):
        if occ[k] == 0:
            e += 1
    return e


cdef inline int _move(int n, int sep_off, int n2, int* offsets, int* occ,
                      int* energy, double* acc_table, u64* state) nogil:
    """One Metropolis proposal; returns 1 when accepted."""
    cdef int k = <int>_randbound(state, <u64>n)
    cdef int d = k + 1 + sep_off
    cdef int new = 1 + <int>_randbound(state, <u64>(n2 - d))
    cdef int old = offsets[k]
    cdef int de = 0
    cdef int b, pos
    if new == old:
        return 1
    for b in range(2):
        pos = (old - 1) if b == 0 else (old - 1 + d)
        occ[pos] -= 1
        if occ[pos] == 0:
            de += 1
    for b in range(2):
        pos = (new - 1) if b == 0 else (new - 1 + d)
        if occ[pos] == 0:
            de -= 1
        occ[pos] += 1
    if de <= 0 or _uniform(state) < acc_table[de]:
        offsets[k] = new
        energy[0] += de
        return 1
    for b in range(2):
        pos = (new - 1) if b == 0 else (new - 1 + d)
        occ[pos] -= 1
    for b in range(2):
        pos = (old - 1) if b == 0 else (old - 1 + d)
        occ[pos] += 1
    return 0


def pt_run(int n, int sep_off, betas, long long iterations,
           long long burn_in, u64 seed, long long check_interval=0):
    """Parallel tempering over the given ladder; see the pure backend."""
    cdef int n2 = 2 * n
    cdef int mlev = len(betas)
    cdef int nt = n2 + 1
    cdef int j, k, e, diff, ok
    cdef long long t, total, measured = 0
    cdef double r, top

    cdef double* bet = <double*>calloc(mlev, sizeof(double))
    cdef double* acc_tab = <double*>calloc(mlev * nt, sizeof(double))
    cdef double* pair_tab = <double*>calloc(
        (mlev - 1 if mlev > 1 else 1) * nt, sizeof(double))
    cdef int** offsets = <int**>calloc(mlev, sizeof(int*))
    cdef int** occ = <int**>calloc(mlev, sizeof(int*))
    cdef int* energy = <int*>calloc(mlev, sizeof(int))
    cdef u64* states = <u64*>calloc(mlev, sizeof(u64))
    cdef u64 swap_state
    cdef double* ratio_sum = <double*>calloc(mlev, sizeof(double))
    cdef double* ratio_sq = <double*>calloc(mlev, sizeof(double))
    cdef i64* accepts = <i64*>calloc(mlev, sizeof(i64))
    cdef i64* swap_acc = <i64*>calloc(mlev, sizeof(i64))
    cdef i64* energy_sum = <i64*>calloc(mlev, sizeof(i64))
    cdef int* tmp_occ = <int*>calloc(n2, sizeof(int))
    cdef int* swp
    cdef long long fail_sweep = -1
    cdef int fail_level = -1

    if not (bet and acc_tab and pair_tab and offsets and occ and energy
            and states and ratio_sum and ratio_sq and accepts and swap_acc
            and energy_sum and tmp_occ):
        raise MemoryError
    try:
        for j in range(mlev):
            bet[j] = betas[j]
            offsets[j] = <int*>calloc(n, sizeof(int))
            occ[j] = <int*>calloc(n2, sizeof(int))
            if offsets[j] == NULL or occ[j] == NULL:
                raise MemoryError
        for j in range(mlev):
            for e in range(nt):
                acc_tab[j * nt + e] = exp(-bet[j] * e)
        for j in range(mlev - 1):
            for e in range(nt):
                pair_tab[j * nt + e] = exp(-(bet[j + 1] - bet[j]) * e)

        swap_state = _stream_init(seed, 0)
        for j in range(mlev):
            states[j] = _stream_init(seed, <u64>(j + 1))
            _fill_offsets(n, sep_off, n2, &states[j], offsets[j])
            _fill_occupancy(n, sep_off, n2, offsets[j], occ[j])
            energy[j] = _count_empty(n2, occ[j])

        total = burn_in + iterations
        with nogil:
            for t in range(total):
                if t >= burn_in:
                    measured += 1
                    for j in range(mlev - 1):
                        r = pair_tab[j * nt + energy[j]]
                        ratio_sum[j] += r
                        ratio_sq[j] += r * r
                    top = 1.0 if energy[mlev - 1] == 0 else 0.0
                    ratio_sum[mlev - 1] += top
                    ratio_sq[mlev - 1] += top
                    for j in range(mlev):
                        energy_sum[j] += energy[j]
                for j in range(mlev):
                    ok = _move(n, sep_off, n2, offsets[j], occ[j],
                               &energy[j], &acc_tab[j * nt], &states[j])
                    if ok and t >= burn_in:
                        accepts[j] += 1
                for j in range(mlev - 1):
                    diff = energy[j] - energy[j + 1]
                    if diff <= 0 or _uniform(&swap_state) < \
                            pair_tab[j * nt + diff]:
                        swp = offsets[j]
                        offsets[j] = offsets[j + 1]
                        offsets[j + 1] = swp
                        swp = occ[j]
                        occ[j] = occ[j + 1]
                        occ[j + 1] = swp
                        e = energy[j]
                        energy[j] = energy[j + 1]
                        energy[j + 1] = e
                        if t >= burn_in:
                            swap_acc[j] += 1
                if check_interval > 0 and (t + 1) % check_interval == 0:
                    for j in range(mlev):
                        _fill_occupancy(n, sep_off, n2, offsets[j], tmp_occ)
                        ok = 1
                        for k in range(n2):
                            if tmp_occ[k] != occ[j][k]:
                                ok = 0
                        if ok == 0 or _count_empty(n2, tmp_occ) != energy[j]:
                            fail_sweep = t
                            fail_level = j
                            break
                    if fail_sweep >= 0:
                        break
        if fail_sweep >= 0:
            raise AssertionError(
                "cached occupancy diverged at sweep %d level %d"
                % (int(fail_sweep), fail_level))

        return {
            "ratio_sum": [ratio_sum[j] for j in range(mlev)],
            "ratio_sq": [ratio_sq[j] for j in range(mlev)],
            "accepts": [int(accepts[j]) for j in range(mlev)],
            "swap_accepts": [int(swap_acc[j]) for j in range(mlev - 1)],
            "energy_sum": [int(energy_sum[j]) for j in range(mlev)],
            "energies": [int(energy[j]) for j in range(mlev)],
            "offsets": [[int(offsets[j][k]) for k in range(n)]
                        for j in range(mlev)],
            "measured": int(measured),
        }
    finally:
        for j in range(mlev):
            if offsets != NULL and offsets[j] != NULL:
                free(offsets[j])
            if occ != NULL and occ[j] != NULL:
                free(occ[j])
        free(bet); free(acc_tab); free(pair_tab); free(offsets); free(occ)
        free(energy); free(states); free(ratio_sum); free(ratio_sq)
        free(accepts); free(swap_acc); free(energy_sum); free(tmp_occ)


def single_chain(int n, int sep_off, double beta, long long sweeps,
                 long long burn, long long thin, u64 seed, u64 tag,
                 collect_visits=False, start_offsets=None):
    """One chain at fixed beta; same contract as the pure backend."""
    cdef int n2 = 2 * n
    cdef int nt = n2 + 1
    cdef int j, k, ok
    cdef long long t, accepts = 0, samples = 0, idx
    cdef int want_visits = 1 if collect_visits else 0

    cdef double* acc_tab = <double*>calloc(nt, sizeof(double))
    cdef int* offsets = <int*>calloc(n, sizeof(int))
    cdef int* occ = <int*>calloc(n2, sizeof(int))
    cdef i64* hist = <i64*>calloc(nt, sizeof(i64))
    cdef i64* strides = <i64*>calloc(n, sizeof(i64))
    cdef i64* visits = NULL
    cdef i64 size = 1
    cdef int energy
    cdef u64 state

    if not (acc_tab and offsets and occ and hist and strides):
        raise MemoryError
    try:
        for j in range(nt):
            acc_tab[j] = exp(-beta * j)
        if want_visits:
            for k in range(n):
                strides[k] = size
                size *= n2 - (k + 1 + sep_off)
            visits = <i64*>calloc(size, sizeof(i64))
            if visits == NULL:
                raise MemoryError

        state = _stream_init(seed, tag)
        if start_offsets is None:
            _fill_offsets(n, sep_off, n2, &state, offsets)
        else:
            for k in range(n):
                offsets[k] = start_offsets[k]
        _fill_occupancy(n, sep_off, n2, offsets, occ)
        energy = _count_empty(n2, occ)

        with nogil:
            for t in range(sweeps):
                ok = _move(n, sep_off, n2, offsets, occ, &energy,
                           acc_tab, &state)
                if ok:
                    accepts += 1
                if t >= burn and (t - burn) % thin == 0:
                    samples += 1
                    hist[energy] += 1
                    if want_visits:
                        idx = 0
                        for k in range(n):
                            idx += (offsets[k] - 1) * strides[k]
                        visits[idx] += 1

        py_hist = [int(hist[j]) for j in range(nt)]
        py_visits = None
        if want_visits:
            py_visits = [int(visits[j]) for j in range(size)]
        py_off = [int(offsets[k]) for k in range(n)]
        return py_hist, py_visits, py_off, int(accepts), int(samples)
    finally:
        free(acc_tab); free(offsets); free(occ); free(hist); free(strides)
        if visits != NULL:
            free(visits)
