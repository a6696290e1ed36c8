"""Generalized Borel-Cantelli: predictable sums, the underlying martingale,
and the Monte Carlo surrogate check.

The exact side works on adapted event sequences over a finite filtered
space: ``predictable_sum`` accumulates conditional occurrence probabilities,
``borel_cantelli_martingale`` is the compensated occurrence count (bitwise
the martingale part of the Doob decomposition of the raw count).

The statistical side simulates event streams and compares two finite-horizon
surrogates: "an event occurs in the tail window" against "the predictable
sum at the horizon clears a divergence cut".  The lemma says the two agree
almost surely in the limit; the check reports how often they agree at the
truncation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .condexp import condexp
from .measure import FiniteMeasureSpace, indicator, set_measurable_wrt
from .montecarlo import IndependentEvents, trial_rng
from .processes import Filtration, Process

__all__ = [
    "EventSequence",
    "event_sequence_from_counts",
    "predictable_sum",
    "borel_cantelli_martingale",
    "BorelCantelliReport",
    "check_borel_cantelli",
]


@dataclass(frozen=True)
class EventSequence:
    """Time-indexed atom sets with sets[n] measurable at filtration step n."""

    sets: tuple  # frozenset per time 0..horizon
    adapted_to: Filtration

    def __post_init__(self) -> None:
        if len(self.sets) != self.adapted_to.horizon + 1:
            raise ValueError("need one event set per filtration step")
        for n, s in enumerate(self.sets):
            if not set_measurable_wrt(frozenset(s), self.adapted_to.steps[n]):
                raise ValueError(f"event set at time {n} is not measurable at step {n}")

    @property
    def horizon(self) -> int:
        return self.adapted_to.horizon


def event_sequence_from_counts(counts: Process, F: Filtration) -> EventSequence:
    """Recover event sets from a cumulative occurrence-count process:
    S_n = {count jumped at n}, S_0 = atoms already counted at time 0."""
    sets = [frozenset(w for w, v in enumerate(counts.values[0]) if v >= 1)]
    for n in range(1, counts.horizon + 1):
        sets.append(
            frozenset(
                w
                for w in range(counts.atom_count)
                if counts.values[n][w] - counts.values[n - 1][w] >= 1
            )
        )
    return EventSequence(sets=tuple(sets), adapted_to=F)


def predictable_sum(space: FiniteMeasureSpace, S: EventSequence) -> Process:
    """p_n = sum_{k<n} condexp(1_{S_{k+1}} | steps[k]); predictable and
    nondecreasing per atom."""
    F = S.adapted_to
    n_atoms = F.atom_count
    acc = [indicator(frozenset(), n_atoms, space.mode).values]
    running = list(acc[0])
    for k in range(F.horizon):
        ind = indicator(frozenset(S.sets[k + 1]), n_atoms, space.mode)
        ce = condexp(space, ind, F.steps[k], F.ambient)
        running = [r + c for r, c in zip(running, ce.values)]
        acc.append(tuple(running))
    return Process(values=tuple(tuple(row) for row in acc), mode=space.mode)


def borel_cantelli_martingale(space: FiniteMeasureSpace, S: EventSequence) -> Process:
    """f_n = sum_{k<n} (1_{S_{k+1}} - condexp(1_{S_{k+1}} | steps[k])).

    This is the compensated occurrence count: raw count minus predictable
    sum, the martingale part of the count's Doob decomposition.
    """
    F = S.adapted_to
    n_atoms = F.atom_count
    rows = [indicator(frozenset(), n_atoms, space.mode).values]
    running = list(rows[0])
    for k in range(F.horizon):
        ind = indicator(frozenset(S.sets[k + 1]), n_atoms, space.mode)
        ce = condexp(space, ind, F.steps[k], F.ambient)
        running = [r + i - c for r, i, c in zip(running, ind.values, ce.values)]
        rows.append(tuple(running))
    return Process(values=tuple(tuple(row) for row in rows), mode=space.mode)


# ---------------------------------------------------------------------------
# Monte Carlo surrogate check
# ---------------------------------------------------------------------------

EventModel = Union[IndependentEvents, Callable[[int, tuple], float]]


@dataclass(frozen=True)
class BorelCantelliReport:
    horizon: int
    trials: int
    tail_start: int
    divergence_cut: float
    match_fraction: float
    p_horizon_mean: float
    blocks: tuple  # (block_index, match_fraction, p_horizon_mean)


def _prob_fn(model: EventModel) -> Callable[[int, tuple], float]:
    if isinstance(model, IndependentEvents):
        return lambda n, history: float(model.prob(n))
    if callable(model):
        return model
    raise TypeError("event model must be IndependentEvents or a prob(n, history) callable")


def check_borel_cantelli(
    model: EventModel,
    horizon: int,
    trials: int,
    seed: int,
    divergence_cut: float,
    tail_start: int,
    block_size: int = 1000,
    workers: int = 1,
) -> BorelCantelliReport:
    """Tail-occurrence vs predictable-sum-divergence agreement rate.

    Per trial: events n = 1..horizon occur with the model's conditional
    probability given the occurrence history; surrogate limsup membership is
    "some event with n >= tail_start occurred", surrogate divergence is
    "sum of conditional probabilities >= divergence_cut".  The lemma makes
    these agree a.e. in the limit; match_fraction measures the truncation.
    """
    if not 1 <= tail_start <= horizon:
        raise ValueError("tail_start must lie in 1..horizon")
    prob = _prob_fn(model)
    independent = isinstance(model, IndependentEvents)
    if independent:
        probs = np.array([float(model.prob(n)) for n in range(1, horizon + 1)])
        if ((probs < 0) | (probs > 1)).any():
            raise ValueError("event probabilities must lie in [0, 1]")

    blocks = [(s, min(block_size, trials - s)) for s in range(0, trials, block_size)]

    def work(blk):
        start, count = blk
        if independent:
            u = np.empty((count, horizon))
            for i in range(count):
                u[i] = trial_rng(seed, start + i).random(horizon)
            occurred = u < probs[None, :]
            p_sum = np.full(count, float(probs.sum()))
            tail_hit = occurred[:, tail_start - 1 :].any(axis=1)
        else:
            p_sum = np.empty(count)
            tail_hit = np.empty(count, dtype=bool)
            for i in range(count):
                u = trial_rng(seed, start + i).random(horizon)
                history: tuple = ()
                total = 0.0
                hit = False
                for n in range(1, horizon + 1):
                    p = float(prob(n, history))
                    if not 0.0 <= p <= 1.0:
                        raise ValueError(f"conditional probability {p} outside [0, 1]")
                    occ = bool(u[n - 1] < p)
                    total += p
                    if occ and n >= tail_start:
                        hit = True
                    history = history + (occ,)
                p_sum[i] = total
                tail_hit[i] = hit
        diverge = p_sum >= divergence_cut
        match = tail_hit == diverge
        return start, int(match.sum()), float(p_sum.sum()), count

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(blk) for blk in blocks]
    results.sort(key=lambda r: r[0])

    rows = []
    matched = 0
    p_total = 0.0
    for idx, (start, m, p_sum_total, count) in enumerate(results):
        rows.append((idx, m / count, p_sum_total / count))
        matched += m
        p_total += p_sum_total
    return BorelCantelliReport(
        horizon=horizon,
        trials=trials,
        tail_start=tail_start,
        divergence_cut=float(divergence_cut),
        match_fraction=matched / trials,
        p_horizon_mean=p_total / trials,
        blocks=tuple(rows),
    )
