import math
import random
from fractions import Fraction

import numpy as np
import pytest

from martkit import (
    Band,
    BettingProcess,
    BiasedWalk,
    CustomSpec,
    FairWalk,
    MartingaleClass,
    PolyaUrn,
    Process,
    RunConfig,
    classify,
    count_upcrossings_batch,
    exhaustive_space,
    simulate,
    simulate_stats,
    trial_rng,
    upcrossings_before,
)
from oracles import upcrossings_state_machine


class TestExhaustiveUnroll:
    def test_fair_walk_two_steps(self):
        sp, f, F = exhaustive_space(FairWalk(), 2, mode="exact")
        assert sp.weights == (Fraction(1, 4),) * 4
        assert f.values[2] == (Fraction(2), Fraction(0), Fraction(0), Fraction(-2))

    def test_certain_walk_concentrates_the_mass(self):
        sp, f, F = exhaustive_space(BiasedWalk(1), 2, mode="exact")
        assert sp.weights == (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        assert f.values[2][0] == Fraction(2)

    def test_biased_walk_is_a_submartingale(self):
        sp, f, F = exhaustive_space(BiasedWalk(Fraction(3, 4)), 2, mode="exact")
        assert classify(sp, f, F).kind is MartingaleClass.SUBMARTINGALE

    def test_urn_proportions_are_an_exact_martingale(self):
        sp, f, F = exhaustive_space(PolyaUrn(1, 1), 2, mode="exact")
        assert sum(sp.weights) == Fraction(1)
        assert f.values[1] == (Fraction(2, 3), Fraction(2, 3), Fraction(1, 3), Fraction(1, 3))
        assert classify(sp, f, F).kind is MartingaleClass.MARTINGALE

    def test_branching_cap_is_enforced(self):
        with pytest.raises(ValueError):
            exhaustive_space(FairWalk(), 17, mode="exact")

    def test_callback_model_unrolls(self):
        spec = CustomSpec(
            initial_state=0,
            transition=lambda n, s: ((Fraction(1, 2), s + 1), (Fraction(1, 2), s - 1)),
            value_of=lambda s: Fraction(s),
        )
        sp, f, F = exhaustive_space(spec, 2, mode="exact")
        assert f.values[2] == (Fraction(2), Fraction(0), Fraction(0), Fraction(-2))


class TestDeterminism:
    def test_single_trial_reproduces_itself(self):
        cfg = RunConfig(seed=9, trials=1, horizon=32)
        a = simulate(FairWalk(), cfg)
        b = simulate(FairWalk(), cfg)
        assert np.array_equal(a.values, b.values)

    def test_trial_streams_depend_only_on_seed_and_index(self):
        x = trial_rng(5, 17).random(8)
        y = trial_rng(5, 17).random(8)
        z = trial_rng(5, 18).random(8)
        assert np.array_equal(x, y)
        assert not np.array_equal(x, z)

    def test_prefix_stability_across_trial_counts(self):
        # growing the batch never rewrites earlier trials
        a = simulate(FairWalk(), RunConfig(seed=3, trials=10, horizon=16))
        b = simulate(FairWalk(), RunConfig(seed=3, trials=25, horizon=16))
        assert np.array_equal(a.values, b.values[:10])

    def test_stats_ignore_scheduling(self):
        cfg = RunConfig(seed=21, trials=900, horizon=64, checkpoint_schedule=(1, 8, 64))
        band = (-0.5, 0.5)
        base = simulate_stats(FairWalk(), cfg, window=16, bands=[band], block_size=1024)
        alt = simulate_stats(FairWalk(), cfg, window=16, bands=[band], block_size=77)
        par = simulate_stats(FairWalk(), cfg, window=16, bands=[band], block_size=77, workers=4)
        for other in (alt, par):
            assert np.array_equal(base.final, other.final)
            assert np.array_equal(base.sup_abs, other.sup_abs)
            assert np.array_equal(base.window_osc, other.window_osc)
            assert np.array_equal(base.band_counts[band], other.band_counts[band])
            assert np.array_equal(base.checkpoint_values, other.checkpoint_values)


class TestStatisticalBehavior:
    def test_fair_walk_mean_is_centered(self):
        trials, horizon = 20_000, 100
        batch = simulate(FairWalk(), RunConfig(seed=42, trials=trials, horizon=horizon))
        mean = float(batch.values[:, -1].mean())
        assert abs(mean) <= 4 * math.sqrt(horizon / trials)

    def test_urn_limit_is_uniform(self):
        trials, horizon = 20_000, 200
        batch = simulate(PolyaUrn(1, 1), RunConfig(seed=42, trials=trials, horizon=horizon))
        xs = np.sort(batch.values[:, -1])
        grid = np.arange(1, trials + 1) / trials
        ks = float(np.max(np.maximum(np.abs(xs - grid), np.abs(xs - (grid - 1.0 / trials)))))
        assert ks <= 0.02

    def test_betting_wealth_stays_centered(self):
        model = BettingProcess(stake_rule=lambda n, hist: 1.0 if n % 2 else 2.0, initial_wealth=10.0)
        batch = simulate(model, RunConfig(seed=8, trials=5_000, horizon=30))
        assert abs(float(batch.values[:, -1].mean()) - 10.0) < 0.5


def test_batch_counts_match_the_exact_recursion():
    batch = simulate(FairWalk(), RunConfig(seed=13, trials=40, horizon=24))
    a, b = -0.5, 1.5
    counts = count_upcrossings_batch(batch.values, a, b)
    for i in range(40):
        path = [float(v) for v in batch.values[i]]
        f = Process.from_path(path, "float")
        want = upcrossings_before(Band(a, b), f, 24)[0]
        assert counts[i] == want == upcrossings_state_machine(path, a, b, 24)


def test_batch_counts_honor_a_shorter_horizon():
    batch = simulate(FairWalk(), RunConfig(seed=13, trials=10, horizon=24))
    counts = count_upcrossings_batch(batch.values, -0.5, 0.5, N=10)
    for i in range(10):
        path = [float(v) for v in batch.values[i]]
        assert counts[i] == upcrossings_state_machine(path, -0.5, 0.5, 10)
