"""Tempering estimator: moves, swaps, ladders, statistical correctness."""

import itertools
import math

import pytest

from pairings import (Configuration, CountMode, Ladder, LadderError, Variant,
                      build_ladder, default_burn_in, estimate,
                      metropolis_step, propose, repeat_and_average,
                      replica_swap, simplified_count)
from pairings import _kernels
from pairings._kernels import Stream

S = Variant.SKOLEM
L = Variant.LANGFORD
ALL = CountMode.ALL_SEQUENCES
REF = CountMode.UP_TO_REFLECTION

# placement counts per label at order 4: offsets 1..P_k, P_k = 8 - k
S4_RANGES = (7, 6, 5, 4)


def s4_configs():
    for offs in itertools.product(*(range(1, p + 1) for p in S4_RANGES)):
        yield Configuration(S, 4, offs)


def s4_partition_sum(beta):
    return sum(math.exp(-beta * c.energy) for c in s4_configs())


def s4_mean_energy(beta):
    z = w = 0.0
    for c in s4_configs():
        q = math.exp(-beta * c.energy)
        z += q
        w += q * c.energy
    return w / z


def s4_move_acceptance(beta):
    """Exact stationary acceptance rate of the single-label move."""
    z = total = 0.0
    for c in s4_configs():
        q = math.exp(-beta * c.energy)
        z += q
        acc = 0.0
        for k, p in enumerate(S4_RANGES, start=1):
            old = c.offsets[k - 1]
            for off in range(1, p + 1):
                de = c.apply_move(k, off)
                c.apply_move(k, old)
                acc += min(1.0, math.exp(-beta * de)) / (4 * p)
        total += q * acc
    return total / z


def test_simplified_count():
    assert simplified_count(S, 4) == 840
    assert simplified_count(S, 12) == math.prod(range(12, 24))
    assert simplified_count(L, 3) == 24
    assert simplified_count(L, 1) == 0
    assert simplified_count(S, 1) == 1
    with pytest.raises(ValueError):
        simplified_count(S, 0)


def test_ladder_validation():
    lad = Ladder.preset("n12")
    assert len(lad) == 12 and lad.betas[0] == 0.0
    with pytest.raises(ValueError):
        Ladder.preset("n99")
    with pytest.raises(ValueError):
        Ladder((0.0,))
    with pytest.raises(ValueError):
        Ladder((0.5, 1.0))
    with pytest.raises(ValueError):
        Ladder((0.0, 1.0, 1.0))


def test_configuration_energies():
    # a valid pairing covers every position: zero empties
    assert Configuration(S, 4, (2, 6, 4, 1)).energy == 0  # 41134232
    # stacking everything low leaves the high end empty
    c = Configuration(S, 4, (1, 1, 1, 1))
    assert c.energy == c.recount() == sum(
        1 for b in c.occupancy if b == 0)
    with pytest.raises(ValueError):
        Configuration(S, 4, (8, 1, 1, 1))
    with pytest.raises(ValueError):
        Configuration(S, 4, (1, 1, 1))
    c.check()


def test_configuration_random_in_range():
    st = Stream(99, 0)
    for _ in range(200):
        c = Configuration.random(L, 6, st)
        assert c.energy == c.recount()
        for k, off in enumerate(c.offsets, start=1):
            assert 1 <= off <= 12 - k - 1


def test_apply_move_tracks_energy():
    st = Stream(5, 1)
    c = Configuration.random(S, 5, st)
    for step in range(20000):
        label, new = propose(c, st)
        before = c.energy
        de = c.apply_move(label, new)
        assert c.energy == before + de == c.recount()
    c.check()


def test_propose_is_uniform():
    st = Stream(17, 0)
    c = Configuration(S, 4, (1, 1, 1, 1))
    labels = [0] * 4
    hits = [set() for _ in range(4)]
    for _ in range(12000):
        label, new = propose(c, st)
        labels[label - 1] += 1
        hits[label - 1].add(new)
    # 4 sigma around 3000 for a fair four-way split
    assert all(abs(v - 3000) < 190 for v in labels), labels
    for k, p in enumerate(S4_RANGES):
        assert hits[k] == set(range(1, p + 1))


def test_metropolis_accepts_everything_at_zero_beta():
    st = Stream(2, 3)
    c = Configuration.random(S, 5, st)
    assert all(metropolis_step(c, 0.0, st) for _ in range(2000))
    assert c.energy == c.recount()


def test_metropolis_rejection_restores_state():
    st = Stream(8, 0)
    c = Configuration.random(S, 4, st)
    for _ in range(5000):
        before = (list(c.offsets), list(c.occupancy), c.energy)
        if not metropolis_step(c, 3.0, st):
            assert (c.offsets, c.occupancy, c.energy) == \
                (before[0], before[1], before[2])
    assert c.energy == c.recount()


def test_replica_swap_rules():
    ground = Configuration(S, 4, (2, 6, 4, 1))
    stacked = Configuration(S, 4, (1, 1, 1, 1))
    assert ground.energy == 0 and stacked.energy == 3
    st = Stream(1, 0)
    # hotter chain lower in energy: swap is certain, ground state sinks
    pair = [ground.copy(), stacked.copy()]
    assert replica_swap(pair, (0.0, 1.0), st) == 1
    assert pair[1].energy == 0 and pair[0].energy == 3
    # already sorted cold-low, huge gap: acceptance exp(-150) never fires
    pair = [stacked.copy(), ground.copy()]
    assert replica_swap(pair, (0.0, 50.0), st) == 0
    assert pair[1].energy == 0


def test_estimate_matches_exact_statistics():
    ladder = Ladder((0.0, 1.1, 32.0))
    rep = estimate(S, 4, ladder, iterations=1 << 16, seed=3, mode=ALL)
    assert rep.levels[0].move_rate == 1.0
    assert abs(rep.levels[1].move_rate - s4_move_acceptance(1.1)) < 0.02
    assert abs(rep.levels[1].mean_energy - s4_mean_energy(1.1)) < 0.1
    z0, z1, z2 = (s4_partition_sum(b) for b in ladder.betas)
    pairs = ((rep.levels[0], z1 / z0), (rep.levels[1], z2 / z1),
             (rep.levels[2], 6.0 / z2))
    for level, want in pairs:
        assert abs(level.ratio - want) < max(5 * level.ratio_se, 0.01)
    assert abs(rep.estimate - 6.0) / 6.0 < 0.15
    assert rep.simplified == 840
    half = estimate(S, 4, ladder, iterations=1 << 16, seed=3, mode=REF)
    assert half.estimate == rep.estimate / 2


def test_estimate_is_deterministic():
    ladder = Ladder((0.0, 1.0, 4.0, 32.0))
    a = estimate(S, 5, ladder, iterations=1 << 12, seed=9)
    b = estimate(S, 5, ladder, iterations=1 << 12, seed=9)
    assert a == b
    c = estimate(S, 5, ladder, iterations=1 << 12, seed=10)
    assert c.estimate != a.estimate


def test_estimate_impossible_order_decays_to_zero():
    ladder = Ladder((0.0, 2.0, 32.0))
    with pytest.warns(UserWarning, match="no ground-state samples"):
        rep = estimate(S, 6, ladder, iterations=1 << 12, seed=0)
    assert rep.estimate == 0.0 and rep.ground_hits == 0
    assert rep.levels[0].ratio > 0.0


def test_estimate_empty_relaxation_short_circuits():
    with pytest.warns(UserWarning, match="no relaxed configurations"):
        rep = estimate(L, 1, iterations=1 << 8, seed=0)
    assert rep.estimate == 0.0 and rep.simplified == 0


def test_estimate_check_interval_clean():
    ladder = Ladder((0.0, 1.0, 32.0))
    rep = estimate(S, 5, ladder, iterations=1 << 12, seed=4,
                   check_interval=256)
    assert rep.estimate > 0.0


def test_report_render():
    ladder = Ladder((0.0, 1.1, 32.0))
    rep = estimate(S, 4, ladder, iterations=1 << 10, seed=1)
    text = rep.render()
    assert "ground-state hits" in text and "estimate:" in text
    assert len(text.splitlines()) == 1 + len(ladder) + 3
    assert rep.burn_in == default_burn_in(1 << 10)


def test_repeat_and_average():
    ladder = Ladder((0.0, 1.1, 32.0))
    rr = repeat_and_average(S, 4, ladder, iterations=1 << 13, runs=3, seed=9)
    assert len(rr.reports) == len(rr.estimates) == 3
    solo = estimate(S, 4, ladder, iterations=1 << 13, seed=10)
    assert rr.estimates[1] == solo.estimate
    assert rr.std > 0.0
    assert min(rr.estimates) <= rr.median <= max(rr.estimates)
    with pytest.raises(ValueError):
        repeat_and_average(S, 4, ladder, runs=0)


def test_mean_energy_at_infinite_temperature():
    # independent placements: P(position p empty) has a product form
    n = 12
    analytic = 0.0
    for p in range(1, 2 * n + 1):
        q = 1.0
        for k in range(1, n + 1):
            pk = 2 * n - k
            c = (1 if p <= pk else 0) + (1 if 1 <= p - k <= pk else 0)
            q *= 1.0 - c / pk
        analytic += q
    rep = estimate(S, n, Ladder.preset("n12"), iterations=1 << 15, seed=2)
    assert abs(rep.levels[0].mean_energy - analytic) < 0.25


def test_single_chain_reaches_boltzmann():
    scipy_stats = pytest.importorskip("scipy.stats")
    beta = 0.35
    # weights indexed the way single_chain encodes visits: mixed radix
    # over offsets with label 1 fastest
    strides = (1, 7, 42, 210)
    weights = [0.0] * 840
    for offs in itertools.product(*(range(1, p + 1) for p in S4_RANGES)):
        idx = sum((off - 1) * st for off, st in zip(offs, strides))
        weights[idx] = math.exp(-beta * Configuration(S, 4, offs).energy)
    z = sum(weights)
    thin, samples = 25, 20000
    burn = 2000
    sweeps = burn + thin * samples
    hist, visits, _, _, got = _kernels.impl.single_chain(
        4, S.sep_offset, beta, sweeps, burn, thin, 123, 1, True, None)
    assert got >= samples
    expected = [w / z * got for w in weights]
    assert min(expected) >= 5
    chi = scipy_stats.chisquare(list(visits), expected)
    assert chi.pvalue > 0.01, chi
    # energy histogram must aggregate the same mass
    assert sum(visits) == sum(hist) == got


def test_build_ladder_shape():
    lad = build_ladder(S, 12, pilot_sweeps=1 << 12, seed=0)
    assert lad.betas[0] == 0.0 and lad.betas[-1] == 32.0
    assert 6 <= len(lad) <= 20
    assert all(b > a for a, b in zip(lad.betas, lad.betas[1:]))
    with pytest.raises(ValueError):
        build_ladder(S, 12, target_swap=0.0)
    with pytest.raises(LadderError):
        build_ladder(L, 1)


def test_build_ladder_level_budget():
    with pytest.raises(LadderError):
        build_ladder(S, 8, target_swap=0.999, max_levels=3,
                     pilot_sweeps=1 << 10)
