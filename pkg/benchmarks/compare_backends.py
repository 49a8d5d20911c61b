"""Time the compiled kernels against the pure-Python fallback.

Each workload runs on both backends (results are checked equal, since
the backends promise bit-identical output) and the best wall time of
--repeat attempts is reported.

    python3 benchmarks/compare_backends.py
    python3 benchmarks/compare_backends.py --quick --repeat 1
"""

import argparse
import time

from pairings import word_primes
from pairings._kernels import _pykernels

try:
    from pairings._kernels import _ckernels
except ImportError:
    _ckernels = None

PRESET_BETAS = [0.0, 0.54, 1.1, 1.69, 2.33, 3.0, 3.73, 4.65, 5.82, 8.1,
                16.0, 32.0]


def workloads(quick):
    bt_n = 8 if quick else 10
    gray_n = 8 if quick else 9
    sweeps = 1 << (12 if quick else 15)
    moduli = tuple(word_primes(4))
    return [
        ("backtrack skolem %d" % bt_n,
         lambda impl: impl.backtrack_count(bt_n, 0)),
        ("backtrack langford %d" % (bt_n + 1),
         lambda impl: impl.backtrack_count(bt_n + 1, 1)),
        ("gray shard skolem %d (2^%d steps)" % (gray_n, 2 * gray_n - 2),
         lambda impl: impl.gray_job(gray_n, 0, 2, 0, 0, moduli)),
        ("tempering %d sweeps, 12 levels" % sweeps,
         lambda impl: impl.pt_run(12, 0, PRESET_BETAS, sweeps,
                                  sweeps // 16, 0, 0)),
        ("single chain %d sweeps" % (sweeps * 4),
         lambda impl: impl.single_chain(12, 0, 1.1, sweeps * 4,
                                        sweeps // 4, 1, 0, 1, False, None)),
    ]


def best_time(fn, impl, repeat):
    best, result = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(impl)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def normalize(value):
    if isinstance(value, dict):
        return {k: normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    return value


def main():
    parser = argparse.ArgumentParser(
        description="compare kernel backends on representative workloads")
    parser.add_argument("--repeat", type=int, default=3,
                        help="attempts per workload, best time kept")
    parser.add_argument("--quick", action="store_true",
                        help="smaller workloads, for slow machines")
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled backend not available; timing the pure backend only")

    rows = []
    for name, fn in workloads(args.quick):
        t_py, r_py = best_time(fn, _pykernels, args.repeat)
        if _ckernels is None:
            rows.append((name, t_py, None, None))
            continue
        t_c, r_c = best_time(fn, _ckernels, args.repeat)
        if normalize(r_py) != normalize(r_c):
            raise SystemExit("backends disagree on %r" % name)
        rows.append((name, t_py, t_c, t_py / t_c))

    width = max(len(r[0]) for r in rows)
    header = "%-*s %12s %12s %10s" % (width, "workload", "python",
                                      "compiled", "speedup")
    print(header)
    print("-" * len(header))
    for name, t_py, t_c, ratio in rows:
        if t_c is None:
            print("%-*s %10.4fs %12s %10s" % (width, name, t_py, "-", "-"))
        else:
            print("%-*s %10.4fs %10.4fs %9.1fx"
                  % (width, name, t_py, t_c, ratio))


if __name__ == "__main__":
    main()
