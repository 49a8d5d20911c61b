"""Command-line interface.

Commands:
  count      exact or estimated counts (backtrack, algebraic, naive, approx)
  jobs       shardable exact counting: split / run / merge
  construct  one explicit pairing for an admissible order
  verify     check a candidate sequence
  exists     existence test for an order

Exit codes: 0 success (and verify: valid), 1 verify: invalid, 2 bad
usage or malformed input, 3 a computation that started but could not be
completed or certified (capacity, shard mismatch, inconsistency).

Runs that matter can be recorded with --record FILE: a canonical JSON
document with no volatile fields, so re-running the same computation
yields a byte-identical record.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .algebraic import (ConsistencyError, ModulusSet, count_gray,
                        count_naive, finalize, merge, partition,
                        read_job_file, read_result_file, write_job_file,
                        write_result_file)
from .approx import Ladder, estimate, repeat_and_average
from .backtrack import count_exact, enumerate_sequences
from .construct import construct
from .core import (CountMode, ExistenceError, InvalidPairsError,
                   MalformedSequenceError, PairingError, Variant,
                   existence, format_pairs, format_sequence,
                   pairs_from_sequence, parse_sequence, reflect, verify)


def _variant_arg(parser):
    parser.add_argument("--variant", required=True,
                        type=Variant.from_string,
                        help="skolem (ends r apart) or langford (r+1 apart)")


def _n_arg(parser):
    parser.add_argument("--n", required=True, type=int, help="order")


def _mode_arg(parser):
    parser.add_argument("--mode", default=CountMode.UP_TO_REFLECTION,
                        type=CountMode.from_string,
                        help="all or reflect (default reflect)")


def _default_seed() -> int:
    raw = os.environ.get("PAIRINGS_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError("PAIRINGS_SEED must be an integer, got %r" % raw)


def _write_record(path, payload) -> None:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    with open(path, "w") as fh:
        fh.write(text + "\n")


def _record_base(args, method=None):
    return {
        "command": args.command,
        "method": method,
        "variant": args.variant.value,
        "n": args.n,
        "mode": args.mode.value if hasattr(args, "mode") else None,
        "version": __version__,
    }


def _parse_ladder(text, variant, n, seed):
    if text == "auto":
        return None
    if text.startswith("preset:"):
        return Ladder.preset(text.split(":", 1)[1])
    try:
        betas = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(
            "--ladder must be 'auto', 'preset:NAME', or comma-separated "
            "numbers, got %r" % text)
    return Ladder(betas)


# ---------------------------------------------------------------- commands

def _cmd_count(args) -> int:
    if args.emit_solutions and args.method != "backtrack":
        raise ValueError("--emit-solutions requires --method backtrack")

    record = _record_base(args, args.method)
    params = {}

    if args.method == "backtrack":
        if args.emit_solutions:
            emitted = [0]
            keep_all = args.mode is CountMode.ALL_SEQUENCES
            with open(args.emit_solutions, "w") as fh:
                def sink(seq):
                    if keep_all or seq.labels <= reflect(seq).labels:
                        fh.write(format_sequence(seq) + "\n")
                        emitted[0] += 1
                enumerate_sequences(args.variant, args.n, sink)
            count = emitted[0]
        else:
            count = count_exact(args.variant, args.n, args.mode)
        result = {"count": count}
    elif args.method == "naive":
        count = count_naive(args.variant, args.n, args.mode)
        result = {"count": count}
    elif args.method == "algebraic":
        moduli = ModulusSet.for_problem(args.variant, args.n,
                                        skip=args.skip_moduli)
        specs = partition(args.variant, args.n, args.mode, args.jobs, moduli)
        work = specs * 2 if args.duplicate else specs
        if args.threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(count_gray, work))
        else:
            results = [count_gray(s) for s in work]
        merged = merge(results)
        count = finalize(merged)
        params = {"jobs": args.jobs, "threads": args.threads,
                  "duplicate": args.duplicate,
                  "moduli": list(moduli.moduli)}
        result = {"count": count, "steps": merged.steps,
                  "residues": list(merged.residues)}
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        ladder = _parse_ladder(args.ladder, args.variant, args.n, seed)
        params = {"iterations": args.iterations, "burn_in": args.burn_in,
                  "seed": seed, "runs": args.runs, "ladder": args.ladder}
        if args.runs > 1:
            if ladder is None:
                from .approx import build_ladder
                ladder = build_ladder(args.variant, args.n, seed=seed)
            rep = repeat_and_average(args.variant, args.n, ladder,
                                     args.iterations, args.runs, seed,
                                     args.mode, args.burn_in)
            for i, value in enumerate(rep.estimates):
                print("run %d (seed %d): %.6g" % (i + 1, seed + i, value))
            print("median estimate: %.6g" % rep.median)
            print("mean estimate: %.6g (std %.3g, %d runs)"
                  % (rep.mean, rep.std, args.runs))
            result = {"estimates": list(rep.estimates),
                      "median": rep.median, "mean": rep.mean,
                      "std": rep.std,
                      "betas": list(ladder.betas)}
        else:
            rep = estimate(args.variant, args.n, ladder, args.iterations,
                           args.burn_in, seed, args.mode)
            print(rep.render())
            result = {"estimate": rep.estimate,
                      "ground_hits": rep.ground_hits,
                      "betas": [lv.beta for lv in rep.levels],
                      "ratios": [lv.ratio for lv in rep.levels]}
        if args.record:
            record.update(parameters=params, result=result)
            _write_record(args.record, record)
        return 0

    print(count)
    if args.record:
        record.update(parameters=params, result=result)
        _write_record(args.record, record)
    return 0


def _cmd_jobs_split(args) -> int:
    moduli = ModulusSet.for_problem(args.variant, args.n,
                                    skip=args.skip_moduli)
    specs = partition(args.variant, args.n, args.mode, args.jobs, moduli)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        name = "%s-%d-%s-b%d-v%d.job" % (
            spec.variant.value, spec.n, spec.mode.value, spec.prefix_bits,
            spec.prefix_value)
        write_job_file(spec, out / name)
        print(out / name)
    return 0


def _cmd_jobs_run(args) -> int:
    spec = read_job_file(args.jobfile)
    out = args.out
    if out is None:
        stem = args.jobfile[:-4] if args.jobfile.endswith(".job") \
            else args.jobfile
        out = stem + ".result"
    first = count_gray(spec)
    if args.duplicate:
        second = count_gray(spec)
        if (first.residues, first.steps, first.checksum) != \
                (second.residues, second.steps, second.checksum):
            raise ConsistencyError(
                "duplicate runs of %s disagree; hardware or build fault"
                % args.jobfile)
    write_result_file(first, out)
    print(out)
    return 0


def _cmd_jobs_merge(args) -> int:
    paths = []
    for raw in args.results:
        p = Path(raw)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.result")))
        else:
            paths.append(p)
    if not paths:
        raise ValueError("no result files found")
    results = [read_result_file(p) for p in paths]
    merged = merge(results)
    count = finalize(merged)
    print(count)
    if args.record:
        head = results[0].spec
        _write_record(args.record, {
            "command": "jobs merge",
            "variant": head.variant.value,
            "n": head.n,
            "mode": head.mode.value,
            "version": __version__,
            "parameters": {"jobs": merged.jobs,
                           "moduli": list(merged.moduli.moduli)},
            "result": {"count": count, "steps": merged.steps,
                       "residues": list(merged.residues)},
        })
    return 0


def _cmd_construct(args) -> int:
    seq = construct(args.variant, args.n)
    if args.format == "pairs":
        print(format_pairs(pairs_from_sequence(seq)))
    else:
        print(format_sequence(seq))
    return 0


def _cmd_verify(args) -> int:
    raw = args.sequence
    if raw == "-":
        raw = sys.stdin.readline().strip()
    seq = parse_sequence(raw)
    if verify(seq, args.variant):
        print("valid")
        return 0
    print("invalid")
    return 1


def _cmd_exists(args) -> int:
    print("yes" if existence(args.variant, args.n) else "no")
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairings",
        description="Count Skolem and Langford pairings, exactly or "
                    "approximately.")
    parser.add_argument("--version", action="version",
                        version="pairings %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="count pairings of one order")
    _variant_arg(p)
    _n_arg(p)
    _mode_arg(p)
    p.add_argument("--method", default="backtrack",
                   choices=("backtrack", "algebraic", "naive", "approx"))
    p.add_argument("--jobs", type=int, default=1,
                   help="algebraic: number of shards (power of two)")
    p.add_argument("--threads", type=int, default=1,
                   help="algebraic: run shards concurrently")
    p.add_argument("--duplicate", action="store_true",
                   help="algebraic: run every shard twice and compare")
    p.add_argument("--skip-moduli", type=int, default=0,
                   help="algebraic: select the next primes down instead")
    p.add_argument("--iterations", type=int, default=1 << 20,
                   help="approx: measured sweeps per run")
    p.add_argument("--burn-in", type=int, default=None,
                   help="approx: discarded sweeps (default iterations/16)")
    p.add_argument("--seed", type=int, default=None,
                   help="approx: stream seed (default $PAIRINGS_SEED or 0)")
    p.add_argument("--runs", type=int, default=1,
                   help="approx: independent runs to pool")
    p.add_argument("--ladder", default="auto",
                   help="approx: auto, preset:NAME, or comma-separated "
                        "inverse temperatures")
    p.add_argument("--emit-solutions", metavar="FILE",
                   help="backtrack: also write every sequence to FILE")
    p.add_argument("--record", metavar="FILE",
                   help="write a canonical JSON record of the run")
    p.set_defaults(func=_cmd_count)

    jobs = sub.add_parser("jobs", help="shardable exact counting")
    jsub = jobs.add_subparsers(dest="jobs_command", required=True)

    p = jsub.add_parser("split", help="write job files covering one count")
    _variant_arg(p)
    _n_arg(p)
    _mode_arg(p)
    p.add_argument("--jobs", type=int, required=True,
                   help="number of shards (power of two)")
    p.add_argument("--out", required=True, help="directory for job files")
    p.add_argument("--skip-moduli", type=int, default=0)
    p.set_defaults(func=_cmd_jobs_split)

    p = jsub.add_parser("run", help="run one job file to a result file")
    p.add_argument("jobfile")
    p.add_argument("--out", help="result path (default: jobfile.result)")
    p.add_argument("--duplicate", action="store_true",
                   help="run twice; fail on any disagreement")
    p.set_defaults(func=_cmd_jobs_run)

    p = jsub.add_parser("merge", help="merge result files into a count")
    p.add_argument("results", nargs="+",
                   help="result files or directories of *.result")
    p.add_argument("--record", metavar="FILE")
    p.set_defaults(func=_cmd_jobs_merge)

    p = sub.add_parser("construct", help="print one pairing of order n")
    _variant_arg(p)
    _n_arg(p)
    p.add_argument("--format", default="labels",
                   choices=("labels", "pairs"))
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("verify", help="check a comma-separated sequence")
    _variant_arg(p)
    p.add_argument("sequence", help="labels like 4,2,3,2,4,3,1,1 or - "
                                    "for stdin")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("exists", help="existence test for an order")
    _variant_arg(p)
    _n_arg(p)
    p.set_defaults(func=_cmd_exists)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MalformedSequenceError, InvalidPairsError, ExistenceError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except PairingError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
