"""Acceptance gate: thirteen criteria, one test per criterion.

Each test is self-contained and seeded, so `pytest -v tests/test_acceptance.py`
prints exactly one pass/fail line per criterion.  Stated runtime budgets are
asserted inside the tests that carry them.
"""

import filecmp
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from martkit import (
    Band,
    BiasedWalk,
    FairWalk,
    Filtration,
    FiniteMeasureSpace,
    FunctionFamily,
    IndependentEvents,
    MartingaleClass,
    Partition,
    PolyaUrn,
    Process,
    RandomVariable,
    RunConfig,
    StoppingTime,
    ValuePredicate,
    ae_equal,
    analyst_modulus,
    band_translation_identity,
    borel_cantelli_martingale,
    check_borel_cantelli,
    check_bridging_inequality,
    check_levy_upward,
    check_maximal_inequality,
    check_optional_stopping,
    check_p_monotonicity,
    check_set_integral_characterization,
    check_upcrossing_estimate,
    classify,
    condexp,
    condexp_agreement_witness,
    condexp_l2,
    count_upcrossings_batch,
    crossing_table,
    doob_decomposition,
    event_sequence_from_counts,
    exhaustive_space,
    fixed_mass_spike_family,
    hitting,
    integral,
    is_predictable,
    shrinking_spike_family,
    simulate,
    simulate_stats,
    stochastic_integral,
    stopping_max,
    stopping_min,
    upcrossings_before,
    vitali_empirical,
)
from martkit.cli import main as cli_main
from conftest import (
    nested_partition_pair,
    random_filtration,
    random_fraction,
    random_predictable_bounded,
    random_rv,
    random_space,
    random_submartingale,
)
from oracles import norm_power_equals, brute_analyst_power

REFERENCE_PATH = [
    Fraction(v)
    for v in ("1/2", "-1/5", "3/10", "4/5", "9/10", "3/2", "3/5",
              "-1/10", "2/5", "9/10", "13/10", "-1/5", "1/2", "7/10")
]


def test_criterion_01_conditional_expectation_equivalence():
    """Averaging and projection routes agree a.e. on 1,000 random instances,
    and the set-integral characterization holds exactly on each."""
    rng = random.Random(42)
    t0 = time.time()
    for _ in range(1000):
        sp = random_space(rng, max_atoms=16)
        f = random_rv(rng, sp.atom_count)
        sub, amb = nested_partition_pair(rng, sp.atom_count)
        a = condexp(sp, f, sub, amb)
        b = condexp_l2(sp, f, sub, amb)
        assert ae_equal(sp, a, b)
        assert condexp_agreement_witness(sp, f, sub, amb) is None
        rep = check_set_integral_characterization(sp, f, sub, amb)
        assert rep.holds and rep.worst_block_gap == 0
    assert time.time() - t0 <= 10.0


def test_criterion_02_upcrossing_estimate_exhaustive():
    """Zero violations of the crossing-count estimate over every fair-walk
    path space of length up to 10 and every band from the +-2 grid,
    degenerate a >= b bands included (these must give lhs <= 0 <= rhs)."""
    t0 = time.time()
    grid = [Fraction(-2), Fraction(-1), Fraction(-1, 2), Fraction(0),
            Fraction(1, 2), Fraction(1), Fraction(2)]
    for N in range(1, 11):
        sp, f, F = exhaustive_space(FairWalk(), N, mode="exact")
        cls = classify(sp, f, F)
        for a in grid:
            for b in grid:
                if a == b:
                    continue
                rep = check_upcrossing_estimate(
                    sp, Band(a, b), f, F, N, classification=cls
                )
                assert rep.holds, (N, a, b, rep.lhs, rep.rhs)
                if a >= b:
                    assert rep.lhs <= 0 <= rep.rhs, (N, a, b)
    assert time.time() - t0 <= 60.0


def test_criterion_03_band_translation_identity():
    """Counting crossings of (f - a)+ over (0, b - a) equals counting
    crossings of f over (a, b), exactly, on 10,000 random path/band draws."""
    rng = random.Random(42)
    t0 = time.time()
    for _ in range(10_000):
        length = rng.randint(2, 30)
        f = Process.from_path([random_fraction(rng) for _ in range(length)], "exact")
        a = random_fraction(rng)
        b = a + Fraction(rng.randint(1, 8), rng.randint(1, 4))
        rep = band_translation_identity(Band(a, b), f)
        assert rep.holds, rep.first_mismatch
    assert time.time() - t0 <= 30.0


def test_criterion_04_reference_path_reproduction():
    """The documented 14-point path with band (0,1) and N=13 lands on
    sigma (0,5,10,13,13), tau (1,7,11,13,13), and exactly 2 upcrossings."""
    f = Process.from_path(REFERENCE_PATH, "exact")
    band = Band(Fraction(0), Fraction(1))
    tab = crossing_table(band, f, 13)
    assert tuple(r[0] for r in tab.sigma) == (0, 5, 10, 13, 13)
    assert tuple(r[0] for r in tab.tau) == (1, 7, 11, 13, 13)
    assert upcrossings_before(band, f, 13) == (2,)


def test_criterion_05_stochastic_integral_lemma():
    """Betting a bounded nonnegative predictable stake on a submartingale
    yields a submartingale, 1,000 random instances; unit stakes telescope to
    the net increment in expectation, exactly."""
    rng = random.Random(42)
    for _ in range(1000):
        sp = random_space(rng, max_atoms=16)
        F = random_filtration(rng, sp.atom_count, horizon=rng.randint(1, 8))
        f = random_submartingale(rng, sp, F)
        R = Fraction(rng.randint(1, 3))
        c = random_predictable_bounded(rng, sp, F, R)
        assert is_predictable(c, F)
        g = stochastic_integral(c, f)
        assert classify(sp, g, F).is_at_least(MartingaleClass.SUBMARTINGALE)
        ones = Process.from_values(
            [[1] * sp.atom_count for _ in range(F.horizon + 1)], "exact"
        )
        h = stochastic_integral(ones, f)
        N = F.horizon
        assert integral(sp, h.at(N)) == integral(sp, f.at(N)) - integral(sp, f.at(0))


def test_criterion_06_doob_decomposition():
    """Splitting a submartingale gives an exact martingale part plus a
    predictable drift that starts at zero, never falls off the null set, and
    reconstructs the input bitwise; compensated event counts coincide with
    the decomposition's martingale part bitwise."""
    rng = random.Random(42)
    for _ in range(1000):
        sp = random_space(rng, max_atoms=16)
        F = random_filtration(rng, sp.atom_count, horizon=rng.randint(1, 8))
        f = random_submartingale(rng, sp, F)
        dec = doob_decomposition(sp, f, F)
        m, a = dec.martingale_part, dec.predictable_part
        assert classify(sp, m, F).kind is MartingaleClass.MARTINGALE
        assert is_predictable(a, F)
        assert a.values[0] == (Fraction(0),) * sp.atom_count
        alive = sp.positive_atoms()
        for n in range(F.horizon):
            assert all(a.values[n][w] <= a.values[n + 1][w] for w in alive)
        for n in range(F.horizon + 1):
            got = tuple(mv + av for mv, av in zip(m.values[n], a.values[n]))
            assert got == f.values[n]
    # interior probabilities keep every atom alive, so the compensated count
    # and the decomposition's martingale part must coincide bitwise, not just a.e.
    schedules = [[Fraction(1, 2)] * 4,
                 [Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4)]]
    for _ in range(5):
        k = rng.randint(3, 6)
        schedules.append(
            [Fraction(rng.randint(1, d - 1), d)
             for d in (rng.randint(2, 6) for _ in range(k))]
        )
    for probs in schedules:
        sp, counts, F = exhaustive_space(IndependentEvents(probs), len(probs), mode="exact")
        S = event_sequence_from_counts(counts, F)
        dec = doob_decomposition(sp, counts, F)
        assert borel_cantelli_martingale(sp, S).values == dec.martingale_part.values


def test_criterion_07_maximal_inequality_and_optional_stopping():
    """Zero violations over exhaustive fair and biased walks with level and
    stopping-time grids; the fair-walk instance at level 1, horizon 2 attains
    equality at one half."""
    lam_grid = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)]
    models = [FairWalk(), BiasedWalk(Fraction(2, 3)), BiasedWalk(Fraction(3, 4)), BiasedWalk(1)]
    for model in models:
        for N in range(1, 8):
            sp, f, F = exhaustive_space(model, N, mode="exact")
            cls = classify(sp, f, F)
            for n in range(N + 1):
                for lam in lam_grid:
                    rep = check_maximal_inequality(sp, f, F, n, lam, classification=cls)
                    assert rep.holds, (model, N, n, lam)
            taus = [StoppingTime.constant(i, sp.atom_count) for i in range(N + 1)]
            hits = [
                StoppingTime.of(hitting(f, ValuePredicate.at_least(lam), 0, N))
                for lam in lam_grid[:3]
            ]
            pairs = [(taus[i], taus[j]) for i in range(N + 1) for j in range(i, N + 1)]
            pairs += [(h, taus[N]) for h in hits]
            pairs += [(taus[0], h) for h in hits]
            pairs += [(stopping_min(hits[0], hits[1]), stopping_max(hits[0], hits[1]))]
            for tau, sigma in pairs:
                rep = check_optional_stopping(sp, f, F, tau=tau, sigma=sigma, classification=cls)
                assert rep.holds, (model, N)
                if cls.kind is MartingaleClass.MARTINGALE:
                    assert rep.equality_holds
    # down-drifting walks enter through their negation, which is the
    # submartingale the inequality speaks about
    for p in (Fraction(1, 4), Fraction(1, 3)):
        for N in range(1, 8):
            sp, f, F = exhaustive_space(BiasedWalk(p), N, mode="exact")
            neg = Process.from_values([[-v for v in row] for row in f.values], "exact")
            cls = classify(sp, neg, F)
            assert cls.is_at_least(MartingaleClass.SUBMARTINGALE)
            for n in range(N + 1):
                for lam in lam_grid:
                    assert check_maximal_inequality(sp, neg, F, n, lam, classification=cls).holds
    sp, f, F = exhaustive_space(FairWalk(), 2, mode="exact")
    rep = check_maximal_inequality(sp, f, F, 2, Fraction(1))
    assert rep.lhs == Fraction(1, 2) and rep.rhs == Fraction(1, 2)


def test_criterion_08_tower_distance_exactness():
    """On 500 random (target, refining-to-singletons filtration) instances the
    L1 distances d_n from the step-n coarsening to the target must be
    nonincreasing with d_horizon = 0, and the 4-atom worked example gives
    d = (1, 1/2, 0).

    The endpoint conjunct holds on every instance.  The monotone conjunct is
    not a property of blockwise averaging: refining a partition can move the
    average away from the target in L1 before full refinement pins it (6-atom
    uniform witness g = (0,0,3,-3,0,0) over the chain trivial ->
    {{0,1,2},{3,4,5}} -> singletons has d = (1, 4/3, 0)), so violations are
    reported rather than hidden."""
    sp = FiniteMeasureSpace.uniform(4, mode="exact")
    g = RandomVariable.from_values([1, 2, 3, 4], "exact")
    F = Filtration.of(
        [Partition.trivial(4), Partition.of([0, 0, 1, 1]), Partition.singletons(4)]
    )
    rep = check_levy_upward(sp, g, F)
    assert rep.d == (Fraction(1), Fraction(1, 2), Fraction(0))

    rng = random.Random(42)
    monotone_failures = []
    endpoint_failures = []
    for i in range(500):
        sp = random_space(rng, max_atoms=12)
        F = random_filtration(rng, sp.atom_count, horizon=rng.randint(2, 5), to_singletons=True)
        g = random_rv(rng, sp.atom_count)
        rep = check_levy_upward(sp, g, F)
        if not rep.final_zero:
            endpoint_failures.append(i)
        if not rep.monotone:
            monotone_failures.append((i, rep.d))
    assert not endpoint_failures, f"d_horizon != 0 on instances {endpoint_failures}"
    assert not monotone_failures, (
        f"{len(monotone_failures)} of 500 instances have a rising step in d; "
        f"first witness: instance {monotone_failures[0][0]} with "
        f"d = {tuple(str(x) for x in monotone_failures[0][1])}"
    )


def test_criterion_09_ui_moduli():
    """Bridging inequality exact on 10,000 random triples; subset search and
    branch-and-bound agree on the analyst modulus up to 20 atoms (bitwise in
    exact mode through 14 atoms, within 1e-9 in float above); raising the
    exponent never shrinks the modulus on probability spaces."""
    rng = random.Random(42)
    for _ in range(10_000):
        sp = random_space(rng, max_atoms=8)
        n = sp.atom_count
        members = tuple(
            RandomVariable.from_values([random_fraction(rng) for _ in range(n)], "exact")
            for _ in range(rng.randint(1, 2))
        )
        fam = FunctionFamily(sp, members, 1)
        C = abs(random_fraction(rng))
        A = frozenset(w for w in range(n) if rng.random() < 0.4)
        assert check_bridging_inequality(fam, C, A).holds

    for _ in range(150):
        target = rng.randint(2, 14)
        sp = random_space(rng, max_atoms=target)
        n = sp.atom_count
        members = tuple(
            RandomVariable.from_values([random_fraction(rng) for _ in range(n)], "exact")
            for _ in range(rng.randint(1, 2))
        )
        p = rng.choice([1, 2, 3])
        fam = FunctionFamily(sp, members, p)
        delta = abs(random_fraction(rng))
        ex = analyst_modulus(fam, delta, force_method="exhaustive")
        bb = analyst_modulus(fam, delta, force_method="branch_bound")
        assert ex == bb, (n, p, str(delta))
        if n <= 11:
            power = brute_analyst_power(sp, members, delta, p)
            assert norm_power_equals(ex, p, power)

    for _ in range(40):
        n = rng.randint(15, 20)
        sp = FiniteMeasureSpace.from_weights(
            [float(abs(random_fraction(rng)) + Fraction(1, 8)) for _ in range(n)],
            mode="float",
        )
        members = tuple(
            RandomVariable.from_values(
                [float(random_fraction(rng)) for _ in range(n)], "float"
            )
            for _ in range(rng.randint(1, 2))
        )
        fam = FunctionFamily(sp, members, rng.choice([1, 2]))
        delta = float(abs(random_fraction(rng)))
        ex = analyst_modulus(fam, delta, force_method="exhaustive")
        bb = analyst_modulus(fam, delta, force_method="branch_bound")
        assert abs(ex - bb) <= 1e-9 * max(1.0, abs(ex)), (n, ex, bb)

    for _ in range(200):
        raw = random_space(rng, max_atoms=8)
        sp = FiniteMeasureSpace.from_weights([w / raw.total for w in raw.weights])
        members = tuple(
            RandomVariable.from_values(
                [random_fraction(rng) for _ in range(sp.atom_count)], "exact"
            )
            for _ in range(rng.randint(1, 2))
        )
        p = rng.choice([1, 2])
        q = p + rng.choice([1, 2])
        rep = check_p_monotonicity(FunctionFamily(sp, members, p), p, q)
        assert rep.holds


def test_criterion_10_vitali_empirical():
    """Shrinking spikes: norms decay like 1/n with vanishing truncation
    modulus; fixed-mass spikes: in-measure convergence with norms pinned at 1
    and modulus pinned at 1 (negative control).  Closed forms to 1e-12."""
    horizon = 64
    sp, members, limit = shrinking_spike_family(horizon, mode="float")
    rep = vitali_empirical(sp, members, limit, 1, horizon)
    assert rep.consistent and rep.lp_decay and rep.ui_small and rep.in_measure_decay
    for n, v in enumerate(rep.lp_curve, start=1):
        assert abs(v - 1.0 / n) <= 1e-12
    for C, m in rep.ui_modulus_curve:
        if C >= 1:
            assert abs(m - 1.0 / math.ceil(C)) <= 1e-12

    sp, members, limit = fixed_mass_spike_family(horizon, mode="float")
    rep = vitali_empirical(sp, members, limit, 1, horizon)
    assert rep.consistent and not rep.lp_decay and not rep.ui_small
    assert rep.in_measure_decay
    for v in rep.lp_curve:
        assert abs(v - 1.0) <= 1e-12
    for _, m in rep.ui_modulus_curve:
        assert abs(m - 1.0) <= 1e-12


def test_criterion_11_ae_convergence_surrogate():
    """Urn proportions settle: at least 99% of 10,000 trajectories have
    final-window oscillation at most 1e-2 by horizon 10,000; fair-walk band
    violations decay at least 2x per doubling of the crossing count."""
    t0 = time.time()
    stats = simulate_stats(
        PolyaUrn(1, 1), RunConfig(seed=42, trials=10_000, horizon=10_000), window=1000
    )
    settled = float((stats.window_osc <= 1e-2).mean())
    assert settled >= 0.99, settled

    batch = simulate(FairWalk(), RunConfig(seed=42, trials=10_000, horizon=1024))
    counts = count_upcrossings_batch(batch.values, -0.5, 0.5)
    ks = (8, 16, 32, 64)
    fractions = [float((counts >= k).mean()) for k in ks]
    for prev, nxt in zip(fractions, fractions[1:]):
        if nxt == 0.0:
            continue
        assert prev / nxt >= 2.0, fractions
    assert time.time() - t0 <= 120.0


def test_criterion_12_borel_cantelli_surrogate(tmp_path):
    """Constant-half events always diverge (match at least 0.999); the
    inverse-square schedule matches at least 0.95; the CLI run is
    byte-identical when repeated with the same seed."""
    rep = check_borel_cantelli(
        IndependentEvents([0.5] * 200), 200, 10_000, 42, 50.0, 100
    )
    assert rep.match_fraction >= 0.999, rep.match_fraction

    probs = [1.0 / (n + 1) ** 2 for n in range(200)]
    rep2 = check_borel_cantelli(IndependentEvents(probs), 200, 10_000, 42, 50.0, 100)
    assert rep2.match_fraction >= 0.95, rep2.match_fraction

    args = ["bc", "--model", "independent", "--prob", "0.5", "--horizon", "200",
            "--trials", "10000", "--seed", "42"]
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert cli_main(args + ["--out-dir", str(d1)]) == 0
    assert cli_main(args + ["--out-dir", str(d2)]) == 0
    assert (d1 / "bc.csv").read_bytes() == (d2 / "bc.csv").read_bytes()


def test_criterion_13_selftest_determinism(tmp_path):
    """Two seeded selftest runs (each internally replaying its Monte Carlo
    suite at maximal parallelism) produce byte-identical output trees."""
    d1, d2 = tmp_path / "run1", tmp_path / "run2"
    assert cli_main(["selftest", "--seed", "42", "--out-dir", str(d1)]) == 0
    assert cli_main(["selftest", "--seed", "42", "--out-dir", str(d2)]) == 0
    files1 = sorted(p.relative_to(d1) for p in d1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(d2) for p in d2.rglob("*") if p.is_file())
    assert files1 == files2 and files1
    for rel in files1:
        assert (d1 / rel).read_bytes() == (d2 / rel).read_bytes(), str(rel)
