"""Exact and approximate counting of Skolem and Langford pairings.

A Skolem pairing of order n places each label r in {1..n} twice in
positions 1..2n with its occurrences exactly r apart; a Langford pairing
puts them r+1 apart.  This package counts them three ways: exhaustive
backtracking, an exact signed-evaluation method that shards across
machines, and a parallel-tempering Monte Carlo estimator for orders out
of exact reach.  Hot loops run in a compiled extension when available,
with a pure-Python fallback that produces identical results.
"""

from ._kernels import backend_name
from .algebraic import (ConsistencyError, DuplicateMismatchError, GrayState,
                        JobResult, JobSpec, MergedResidues, MergeError,
                        ModulusSet, SignVector, check_symmetry_lemmas,
                        count_algebraic, count_gray, count_naive, crt,
                        finalize, magnitude_bound, merge, partition,
                        poly_eval, read_job_file, read_result_file,
                        signed_term, symmetry_reduction, word_primes,
                        write_job_file, write_result_file)
from .approx import (PRESET_LADDERS, Configuration, EstimateReport, Ladder,
                     LadderError, LevelStats, RepeatReport, build_ladder,
                     default_burn_in, estimate, metropolis_step, propose,
                     repeat_and_average, replica_swap, simplified_count)
from .backtrack import count_exact, enumerate_sequences, first_solution
from .construct import construct, construct_pairs
from .core import (CapacityError, CountMode, ExistenceError,
                   InvalidPairsError, LabelSequence, MalformedSequenceError,
                   PairingError, PairList, Variant, existence, format_pairs,
                   format_sequence, pairs_from_sequence, parse_pairs,
                   parse_sequence, reflect, sequence_from_pairs, verify,
                   verify_pairs)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "Configuration", "ConsistencyError", "CountMode",
    "DuplicateMismatchError", "EstimateReport", "ExistenceError",
    "GrayState", "InvalidPairsError", "JobResult", "JobSpec",
    "LabelSequence", "Ladder", "LadderError", "LevelStats",
    "MalformedSequenceError", "MergedResidues", "MergeError", "ModulusSet",
    "PRESET_LADDERS", "PairingError", "PairList", "RepeatReport",
    "SignVector", "Variant", "backend_name", "build_ladder",
    "check_symmetry_lemmas", "construct", "construct_pairs",
    "count_algebraic", "count_exact", "count_gray", "count_naive", "crt",
    "default_burn_in", "enumerate_sequences", "estimate", "existence",
    "finalize", "first_solution", "format_pairs", "format_sequence",
    "magnitude_bound", "merge", "metropolis_step", "pairs_from_sequence",
    "parse_pairs", "parse_sequence", "partition", "poly_eval", "propose",
    "read_job_file", "read_result_file", "reflect", "repeat_and_average",
    "replica_swap", "sequence_from_pairs", "signed_term",
    "simplified_count", "symmetry_reduction", "verify", "verify_pairs",
    "word_primes", "write_job_file", "write_result_file", "__version__",
]
