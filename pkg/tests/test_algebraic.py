"""Signed cube evaluation: factors, walks, moduli, shards, reconstruction."""

import math
import random

import pytest

from pairings import (CapacityError, ConsistencyError, CountMode,
                      DuplicateMismatchError, GrayState, JobResult, JobSpec,
                      MergedResidues, MergeError, ModulusSet, SignVector,
                      Variant, check_symmetry_lemmas, count_algebraic,
                      count_exact, count_gray, count_naive, crt, finalize,
                      magnitude_bound, merge, partition, poly_eval,
                      read_job_file, read_result_file, signed_term,
                      symmetry_reduction, word_primes, write_job_file,
                      write_result_file)

S = Variant.SKOLEM
L = Variant.LANGFORD
ALL = CountMode.ALL_SEQUENCES
REF = CountMode.UP_TO_REFLECTION

# the order-4 exact-separation factors written out term by term:
# one factor per label r, one term x_a*x_b per placement (a, b = a+r)
SKOLEM4_FACTORS = [
    [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)],
    [(1, 3), (2, 4), (3, 5), (4, 6), (5, 7), (6, 8)],
    [(1, 4), (2, 5), (3, 6), (4, 7), (5, 8)],
    [(1, 5), (2, 6), (3, 7), (4, 8)],
]
# order-3 shifted variant: label r pairs positions r+1 apart
LANGFORD3_FACTORS = [
    [(1, 3), (2, 4), (3, 5), (4, 6)],
    [(1, 4), (2, 5), (3, 6)],
    [(1, 5), (2, 6)],
]


def eval_factor_table(table, vec):
    x = (None,) + vec.values()  # 1-based
    out = 1
    for factor in table:
        out *= sum(x[a] * x[b] for a, b in factor)
    return out


def test_poly_eval_all_ones():
    assert poly_eval(S, SignVector(4)) == 7 * 6 * 5 * 4
    assert poly_eval(L, SignVector(3)) == 4 * 3 * 2
    assert poly_eval(L, SignVector(1)) == 0  # label 1 has no placement


def test_poly_eval_against_term_tables():
    rng = random.Random(11)
    for _ in range(300):
        v4 = SignVector(4, rng.getrandbits(8))
        assert poly_eval(S, v4) == eval_factor_table(SKOLEM4_FACTORS, v4)
        v3 = SignVector(3, rng.getrandbits(6))
        assert poly_eval(L, v3) == eval_factor_table(LANGFORD3_FACTORS, v3)


def test_sign_vector_basics():
    v = SignVector.from_values((1, -1, 1, 1, -1, -1))
    assert v.bits == 0b110010 and v.n == 3
    assert v.sign == -1
    assert v.negate().values() == (-1, 1, -1, -1, 1, 1)
    assert v.reverse().values() == tuple(reversed(v.values()))
    assert v.negate_even_positions().values() == (1, 1, 1, -1, -1, 1)
    with pytest.raises(ValueError):
        SignVector(2, 1 << 4)
    with pytest.raises(ValueError):
        SignVector.from_values((1, 0, 1, 1))


def test_gray_state_incremental_walk():
    rng = random.Random(7)
    g = GrayState(S, 12)
    bounds = [2 * 12 - d for d in range(1, 13)]
    checkpoints = set(rng.sample(range(100000), 20))
    for step in range(100000):
        g.flip(rng.randrange(24))
        if step % 1000 == 0 or step in checkpoints:
            assert all(s % 2 == k % 2 for s, k in zip(g.sums, bounds))
        if step in checkpoints:
            assert g.sums == g.recompute()
    assert g.sums == g.recompute()
    assert all(abs(s) <= k for s, k in zip(g.sums, bounds))


def test_gray_state_signed_value():
    g = GrayState(S, 4)
    assert g.signed_value() == 840
    g.flip(0)
    assert g.sign == -1
    assert g.signed_value() == -poly_eval(S, g.vector)


def test_count_naive_known():
    assert count_naive(S, 4, ALL) == 6
    assert count_naive(S, 5) == 5
    assert count_naive(L, 7) == 26
    assert count_naive(S, 6, ALL) == 0
    assert count_naive(L, 5, ALL) == 0
    with pytest.raises(CapacityError):
        count_naive(S, 11)


def test_naive_matches_backtrack():
    for variant in (S, L):
        for n in range(1, 9):
            assert count_naive(variant, n, ALL) == \
                count_exact(variant, n, ALL), (variant, n)


def test_symmetry_reduction_table():
    assert symmetry_reduction(S, 8) == (2, 4)
    assert symmetry_reduction(S, 9) == (2, 4)
    assert symmetry_reduction(S, 1) == (1, 2)
    assert symmetry_reduction(S, 6) == (1, 2)
    assert symmetry_reduction(L, 7) == (1, 2)
    assert symmetry_reduction(L, 8) == (1, 2)


def test_symmetry_exhaustive_order4():
    for bits in range(256):
        v = SignVector(4, bits)
        base = signed_term(S, v)
        assert signed_term(S, v.negate()) == base
        assert signed_term(S, v.reverse()) == base
        assert signed_term(S, v.negate_even_positions()) == base


def test_symmetry_lemma_sampling():
    for variant, n in ((S, 4), (S, 5), (S, 8), (S, 9)):
        report = check_symmetry_lemmas(variant, n, samples=250, seed=1)
        assert report.ok and report.even_negation_applicable
    for variant, n in ((S, 6), (L, 7), (L, 8)):
        report = check_symmetry_lemmas(variant, n, samples=100, seed=1)
        assert report.ok and not report.even_negation_applicable


def test_word_primes_and_modulus_set():
    primes = word_primes(6)
    assert primes[0] == 2147483647 and len(set(primes)) == 6
    assert all(primes[i] > primes[i + 1] for i in range(5))
    assert set(word_primes(4)).isdisjoint(word_primes(4, skip=4))
    ms = ModulusSet.for_problem(S, 12)
    assert ms.sufficient_for(S, 12)
    assert ms.product() > magnitude_bound(S, 12)
    assert not ModulusSet(word_primes(2)).sufficient_for(S, 16)
    with pytest.raises(ValueError):
        ModulusSet((2147483647, 2147483647))
    with pytest.raises(ValueError):
        ModulusSet((2147483646,))  # even, not prime
    with pytest.raises(ValueError):
        ModulusSet(((1 << 31) + 11,))  # prime but too wide


def test_crt_round_trip():
    moduli = word_primes(4)
    rng = random.Random(3)
    for _ in range(50):
        value = rng.randrange(math.prod(moduli))
        assert crt([value % m for m in moduli], moduli) == value


def test_pipeline_known_counts():
    for variant, n, want in ((S, 4, 3), (S, 5, 5), (S, 8, 252), (S, 9, 1328),
                             (L, 3, 1), (L, 4, 1), (L, 7, 26), (L, 8, 150),
                             (S, 1, 1), (S, 6, 0), (L, 5, 0), (L, 1, 0)):
        assert count_algebraic(variant, n) == want, (variant, n)


def test_pipeline_threads_and_duplicate():
    assert count_algebraic(S, 8, num_jobs=8, threads=4) == 252
    assert count_algebraic(L, 7, num_jobs=4, duplicate=True) == 26


def test_unreduced_single_job_reconstructs_raw_sum():
    ms = ModulusSet(word_primes(4))
    spec = JobSpec(S, 4, ALL, 0, 0, ms, sym_bits=0)
    result = count_gray(spec)
    assert result.steps == 1 << 8
    assert crt(result.residues, ms.moduli) == (1 << 8) * 6


def test_partition_shards_sum_to_whole():
    ms = ModulusSet.for_problem(S, 9)
    whole = merge([count_gray(s) for s in partition(S, 9, REF, 1, ms)])
    split = merge([count_gray(s) for s in partition(S, 9, REF, 8, ms)])
    assert whole.residues == split.residues
    assert whole.steps == split.steps
    assert finalize(split) == 1328


def test_partition_validation():
    with pytest.raises(ValueError):
        partition(S, 8, REF, 3)
    with pytest.raises(ValueError):
        partition(S, 4, REF, 1 << 10)
    with pytest.raises(CapacityError):
        partition(S, 16, REF, 2, ModulusSet(word_primes(2)))


def test_jobspec_validation():
    ms = ModulusSet(word_primes(4))
    with pytest.raises(ValueError):
        JobSpec(S, 8, REF, 2, 4, ms)  # prefix_value needs 3 bits
    with pytest.raises(ValueError):
        JobSpec(S, 1, REF, 2, 0, ms)  # 1 sym + 2 prefix > 2 coordinates
    with pytest.raises(ValueError):
        JobSpec(S, 8, REF, 0, 0, ms, sym_bits=3)
    assert JobSpec(S, 8, REF, 3, 6, ms).free_bits == 16 - 2 - 3


def test_disjoint_modulus_sets_agree():
    a = count_algebraic(S, 9, moduli=ModulusSet.for_problem(S, 9))
    b = count_algebraic(S, 9, moduli=ModulusSet.for_problem(S, 9, skip=6))
    assert a == b == 1328


def test_merge_rejects_incomplete_and_foreign():
    ms = ModulusSet.for_problem(S, 5)
    specs = partition(S, 5, REF, 4, ms)
    results = [count_gray(s) for s in specs]
    with pytest.raises(MergeError):
        merge(results[:3])
    with pytest.raises(MergeError):
        merge(results + [count_gray(partition(S, 4, REF, 4, ms)[0])])
    with pytest.raises(MergeError):
        merge([])


def test_merge_duplicates():
    ms = ModulusSet.for_problem(S, 5)
    specs = partition(S, 5, REF, 2, ms)
    r0, r1 = (count_gray(s) for s in specs)
    # consistent duplicates collapse
    good = merge([r0, r0, r1])
    assert finalize(good) == 5 and good.steps == r0.steps + r1.steps
    # a corrupted copy with no majority demands another run
    bad = JobResult(r0.spec,
                    tuple((v + 1) % m for v, m in
                          zip(r0.residues, ms.moduli)),
                    r0.steps, r0.checksum)
    with pytest.raises(DuplicateMismatchError):
        merge([r0, bad, r1])
    # majority of three resolves silently
    assert merge([r0, r0, bad, r1]).residues == good.residues
    # checksum disagreement alone is enough to flag a copy
    forged = JobResult(r0.spec, r0.residues, r0.steps, "0" * 16)
    with pytest.raises(DuplicateMismatchError):
        merge([r0, forged, r1])


def test_checksum_behavior():
    ms = ModulusSet.for_problem(S, 5)
    spec = partition(S, 5, REF, 2, ms)[0]
    again = count_gray(spec)
    assert count_gray(spec).checksum == again.checksum
    other = count_gray(partition(S, 5, REF, 2, ms)[1])
    assert other.checksum != again.checksum


def _planted(variant, n, mode, value, moduli):
    """MergedResidues whose reconstruction yields the planted value."""
    residues = tuple(value * pow(2, 2 * n, m) % m for m in moduli.moduli)
    return MergedResidues(variant, n, mode, 0, moduli, residues, 1, 1)


def test_finalize_consistency_checks():
    ms = ModulusSet.for_problem(S, 4)
    assert finalize(_planted(S, 4, ALL, 6, ms)) == 6
    assert finalize(_planted(S, 4, REF, 6, ms)) == 3
    with pytest.raises(ConsistencyError):
        finalize(_planted(S, 4, REF, 7, ms))  # odd total above n=1
    with pytest.raises(ConsistencyError):
        finalize(_planted(S, 6, ALL, 2, ModulusSet.for_problem(S, 6)))
    with pytest.raises(ConsistencyError):
        finalize(_planted(S, 4, ALL, magnitude_bound(S, 4) // 2 + 2,
                          ModulusSet.for_problem(S, 4)))
    with pytest.raises(CapacityError):
        finalize(MergedResidues(S, 16, REF, 2, ModulusSet(word_primes(2)),
                                (1, 1), 1, 1))


def test_job_file_round_trip(tmp_path):
    ms = ModulusSet.for_problem(L, 8)
    spec = partition(L, 8, ALL, 4, ms)[2]
    path = tmp_path / "shard.job"
    write_job_file(spec, path)
    assert read_job_file(path) == spec
    again = tmp_path / "shard2.job"
    write_job_file(read_job_file(path), again)
    assert path.read_bytes() == again.read_bytes()
    with pytest.raises(ValueError):
        write_job_file(JobSpec(S, 4, ALL, 0, 0, ms, sym_bits=0), path)


def test_result_file_round_trip(tmp_path):
    ms = ModulusSet.for_problem(S, 5)
    result = count_gray(partition(S, 5, REF, 2, ms)[1])
    path = tmp_path / "shard.result"
    write_result_file(result, path)
    assert read_result_file(path) == result


def test_job_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.job"
    path.write_text("not a job file\n")
    with pytest.raises(ValueError):
        read_job_file(path)
    path.write_text("pairings-job v1\nvariant: skolem\nn: 8\n")
    with pytest.raises(ValueError):
        read_job_file(path)  # missing fields
    good = ("pairings-job v1\nvariant: skolem\nn: 8\nmode: reflect\n"
            "prefix_bits: 0\nprefix_value: 0\nmoduli: 2147483647\n")
    path.write_text(good + "surprise: 1\n")
    with pytest.raises(ValueError):
        read_job_file(path)
