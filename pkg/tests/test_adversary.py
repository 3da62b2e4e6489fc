"""Adversary strategies and the security experiments."""
import math
from collections import Counter

import pytest

from ringlab.adversary import (
    BlackMarbleConfig,
    adversary_core,
    adversary_matching_count,
    adversary_trivial,
    estimate_success,
    run_campaign,
    run_experiment,
    run_experiment_black_marble,
    _adv_core,
    _adv_trivial,
    _corrupt_users,
    _remove_users,
)
from ringlab.core import is_core_equal
from ringlab.errors import InstanceTooLarge, InvalidBeta, InvalidConfig
from ringlab.graph import Partition
from ringlab.samplers import (
    Binomial,
    RandomSource,
    Regular,
    SamplerConfig,
    _StreamFamily,
    sample_transaction_graph,
)

from conftest import make_graph


def _three_sigma(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


# -- individual adversaries ----------------------------------------------------------


def test_trivial_tie_break_lowest_ring_index():
    # ring sizes 3, 2, 2: the first size-2 ring (index 1) must be chosen
    g = make_graph(
        4, 3, [(0, 0), (1, 0), (2, 0), (1, 1), (3, 1), (2, 2), (3, 2)]
    )
    for sid in range(20):
        u, r = adversary_trivial(g, RandomSource(1, sid))
        assert r == 1
        assert u in (1, 3)


def test_trivial_certain_on_singleton_ring():
    g = make_graph(3, 2, [(0, 0), (1, 0), (2, 1)])
    assert adversary_trivial(g, RandomSource(2)) == (2, 1)


def test_trivial_uniform_over_members():
    g = make_graph(3, 1, [(0, 0), (1, 0), (2, 0)])
    seen = Counter(adversary_trivial(g, RandomSource(3, sid))[0] for sid in range(30000))
    for u in range(3):
        assert abs(seen[u] / 30000 - 1 / 3) < 4 * math.sqrt((1 / 3) * (2 / 3) / 30000)


def test_core_adversary_toy_always_succeeds(toy_graph):
    # every ring's core degree is 1; the guess is forced and correct
    for sid in range(10):
        assert adversary_core(toy_graph, RandomSource(4, sid)) == (0, 0)


def test_core_adversary_equals_trivial_on_core_equal_graphs():
    # disjoint bicliques: core(G) == G, so both strategies see the same
    # graph and consume randomness identically
    edges = [(u, r) for u in range(3) for r in range(3)]
    edges += [(u + 3, r + 3) for u in range(3) for r in range(3)]
    g = make_graph(6, 6, edges)
    assert is_core_equal(g)
    for sid in range(25):
        assert adversary_core(g, RandomSource(5, sid)) == adversary_trivial(
            g, RandomSource(5, sid)
        )


def test_core_adversary_uniform_over_core_members_when_core_equal():
    edges = [(u, r) for u in range(3) for r in range(3)]
    g = make_graph(3, 3, edges)
    assert is_core_equal(g)
    trials = 30000
    seen = Counter(adversary_core(g, RandomSource(6, sid)) for sid in range(trials))
    assert set(r for _, r in seen) == {0}  # lowest-index tie break
    for u in range(3):
        assert abs(seen[(u, 0)] / trials - 1 / 3) < 4 * math.sqrt((1 / 3) * (2 / 3) / trials)


def test_matching_count_toy_picks_matched_edge(toy_graph):
    assert adversary_matching_count(toy_graph) == (0, 0)


def test_matching_count_k22_tie_break():
    g = make_graph(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert adversary_matching_count(g) == (0, 0)


def test_matching_count_cap():
    g = make_graph(11, 1, [(0, 0)])
    with pytest.raises(InstanceTooLarge):
        adversary_matching_count(g)


def test_paired_core_beats_trivial_on_core_mismatched_instances():
    # small single chunk with k=1: core mismatches are frequent
    cfg = SamplerConfig(Partition.single(4), Regular(1))
    fam = _StreamFamily(7)
    triv = core_adv = considered = 0
    for t in range(10000):
        gen = fam.generator(t)
        g, m = sample_transaction_graph(cfg, 4, 4, RandomSource(7, t))
        if is_core_equal(g):
            continue
        considered += 1
        triv += _adv_trivial(g, gen) in m
        core_adv += _adv_core(g, gen) in m
    assert considered > 1000
    p1, p2 = core_adv / considered, triv / considered
    noise = 3 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / considered)
    assert p1 >= p2 - noise
    assert p1 > p2  # strict at this sample size: core analysis really helps


def test_paired_matching_count_beats_core_on_small_instances():
    cfg = SamplerConfig(Partition.single(6), Regular(2))
    fam = _StreamFamily(8)
    core_adv = count_adv = 0
    trials = 10000
    for t in range(trials):
        gen = fam.generator(t)
        g, m = sample_transaction_graph(cfg, 6, 6, RandomSource(8, t))
        core_adv += _adv_core(g, gen) in m
        count_adv += adversary_matching_count(g) in m
    p1, p2 = count_adv / trials, core_adv / trials
    noise = 3 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / trials)
    assert p1 >= p2 - noise


# -- experiments -----------------------------------------------------------------------


def test_run_experiment_biclique_trivial_rate():
    cfg = SamplerConfig(Partition.equal_chunks(20, 4), Regular(3))
    est = estimate_success(cfg, 20, "trivial", 20000, RandomSource(9))
    assert abs(est.estimate - 0.25) <= _three_sigma(0.25, est.trials)


def test_run_experiment_singleton_rings_always_win():
    cfg = SamplerConfig(Partition.single(6), Binomial(0.0))
    est = estimate_success(cfg, 6, "trivial", 400, RandomSource(10))
    assert est.estimate == 1.0
    assert est.ci_high == 1.0
    assert est.ci_low < 1.0


def test_experiment_outcome_success_edge_in_matching():
    cfg = SamplerConfig(Partition.equal_chunks(8, 4), Regular(2))
    for sid in range(50):
        rng = RandomSource(11, sid)
        outcome = run_experiment(cfg, 8, "core", rng)
        g, m = sample_transaction_graph(cfg, 8, 8, RandomSource(11, sid))
        if outcome.success:
            assert outcome.guessed_edge in m


def test_advantage_bound_all_adversaries():
    # success of every implemented adversary is at most
    # Pr[G != core(G)] + 1/(k+1) up to Monte Carlo noise
    k = 2
    cfg = SamplerConfig(Partition.single(6), Regular(k))
    trials = 5000
    mismatch = None
    for adversary in ("trivial", "core", "matching_count"):
        result = run_campaign(cfg, 6, adversary, trials, RandomSource(12))
        if mismatch is None:
            mismatch = result.core_mismatch.estimate
        bound = mismatch + 1 / (k + 1)
        assert result.success.estimate <= bound + _three_sigma(
            min(bound, 1.0), trials
        )


def test_estimate_success_deterministic():
    cfg = SamplerConfig(Partition.equal_chunks(12, 4), Regular(2))
    a = estimate_success(cfg, 12, "core", 500, RandomSource(13))
    b = estimate_success(cfg, 12, "core", 500, RandomSource(13))
    assert a == b


def test_estimate_rejects_bad_args():
    cfg = SamplerConfig(Partition.single(4), Regular(1))
    with pytest.raises(InvalidConfig):
        estimate_success(cfg, 5, "trivial", 10, RandomSource(0))
    with pytest.raises(InvalidConfig):
        estimate_success(cfg, 4, "nope", 10, RandomSource(0))
    with pytest.raises(InvalidConfig):
        estimate_success(cfg, 4, "trivial", 0, RandomSource(0))


# -- black marbles ----------------------------------------------------------------------


def test_black_marble_beta_zero_is_noop():
    cfg = SamplerConfig(Partition.equal_chunks(12, 4), Regular(2))
    marble = BlackMarbleConfig(0.0)
    for sid in range(40):
        active = run_experiment_black_marble(cfg, 12, marble, "core", RandomSource(14, sid))
        passive = run_experiment(cfg, 12, "core", RandomSource(14, sid))
        assert active == passive


def test_black_marble_reduction_removes_only_corrupted_edges():
    cfg = SamplerConfig(Partition.equal_chunks(8, 4), Regular(3))
    g, _ = sample_transaction_graph(cfg, 8, 8, RandomSource(15))
    reduced = _remove_users(g, {0, 5})
    assert reduced.n_users == g.n_users and reduced.n_rings == g.n_rings
    assert reduced.edges == {(u, r) for u, r in g.edges if u not in (0, 5)}


def test_black_marble_corruption_is_admissible():
    part = Partition.equal_chunks(20, 5)
    cfg = SamplerConfig(part, Regular(2))
    for beta in (0.2, 0.4, 0.79):
        marble = BlackMarbleConfig(beta)
        for sid in range(30):
            corrupted = _corrupt_users(cfg, marble, RandomSource(16, sid).generator)
            assert marble.admissible(part, corrupted)
            per_chunk = Counter(part.chunk_of(u) for u in corrupted)
            assert all(per_chunk[c] == math.floor(beta * 5) for c in range(4))


def test_black_marble_invalid_beta():
    with pytest.raises(InvalidBeta):
        BlackMarbleConfig(1.0)
    with pytest.raises(InvalidBeta):
        BlackMarbleConfig(-0.1)


def test_black_marble_regular_trivial_success_stays_at_trivial_rate():
    # within-ring signer exchangeability makes corruption useless to the
    # smallest-ring guesser: success sits at 1/(k+1) for every beta
    k = 3
    cfg = SamplerConfig(Partition.equal_chunks(32, 8), Regular(k))
    trials = 6000
    for beta in (0.0, 0.25, 0.5):
        marble = BlackMarbleConfig(beta) if beta else None
        est = estimate_success(
            cfg, 32, "trivial", trials, RandomSource(17), marble=marble
        )
        assert abs(est.estimate - 1 / (k + 1)) <= _three_sigma(1 / (k + 1), trials)


def test_black_marble_never_helps_core_adversary_in_untargeted_game():
    cfg = SamplerConfig(Partition.equal_chunks(32, 8), Regular(3))
    trials = 6000
    base = estimate_success(cfg, 32, "core", trials, RandomSource(18))
    for beta in (0.25, 0.5):
        est = estimate_success(
            cfg, 32, "core", trials, RandomSource(18), marble=BlackMarbleConfig(beta)
        )
        noise = 3 * math.sqrt(
            (est.estimate * (1 - est.estimate) + base.estimate * (1 - base.estimate))
            / trials
        )
        assert est.estimate <= base.estimate + noise
