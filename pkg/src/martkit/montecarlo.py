"""Seeded trajectory models: exact path-space enumeration and Monte Carlo.

Every model exposes the same two faces:

* ``exhaustive_space`` unrolls the full branching tree into a finite measure
  space (atom = path, weight = path probability, exact Fractions in exact
  mode), the coordinate value process, and its natural filtration.  This is
  what the theorem-level exact tests run on.
* ``simulate`` / ``simulate_stats`` draw seeded float64 trajectories.  Each
  trial owns a counter-based RNG stream keyed by (seed, trial index), so
  results do not depend on scheduling; aggregates are reduced in a fixed
  sequential order over trial index, making reports bitwise reproducible at
  any worker count.

``simulate`` materializes the full trials x (horizon+1) array and is meant
for moderate sizes; ``simulate_stats`` processes trials in blocks and keeps
only summaries (final value, tail-window oscillation, band-crossing counts,
checkpoints), which is how the 1e4 x 1e4 runs stay in memory.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .measure import FiniteMeasureSpace
from .processes import Filtration, Process, natural_filtration
from .scalars import Mode, Scalar, coerce_scalar

__all__ = [
    "FairWalk",
    "BiasedWalk",
    "PolyaUrn",
    "BettingProcess",
    "IndependentEvents",
    "CustomSpec",
    "TrajectoryModel",
    "RunConfig",
    "EXHAUSTIVE_LEAF_CAP",
    "exhaustive_space",
    "TrajectoryBatch",
    "simulate",
    "TrajectoryStats",
    "simulate_stats",
    "trial_rng",
    "count_upcrossings_batch",
]

EXHAUSTIVE_LEAF_CAP = 1 << 16


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FairWalk:
    """Symmetric +/-step random walk started at 0."""

    step: Scalar = 1


@dataclass(frozen=True)
class BiasedWalk:
    """Walk that steps +step with probability p_up, else -step."""

    p_up: Scalar
    step: Scalar = 1

    def __post_init__(self) -> None:
        if not 0 <= self.p_up <= 1:
            raise ValueError("p_up must lie in [0, 1]")


@dataclass(frozen=True)
class PolyaUrn:
    """Polya urn; the tracked value is the proportion of red balls."""

    initial_red: int = 1
    initial_black: int = 1

    def __post_init__(self) -> None:
        if self.initial_red < 1 or self.initial_black < 1:
            raise ValueError("urn counts must be positive")


@dataclass(frozen=True)
class BettingProcess:
    """Wealth of a player betting ``stake_rule(n, history)`` on fair flips.

    ``history`` is the tuple of +/-1 outcomes of rounds 1..n-1, so the stake
    for round n is predictable.  Not JSON-serializable (callback)."""

    stake_rule: Callable[[int, tuple], Scalar]
    initial_wealth: Scalar = 0


@dataclass(frozen=True)
class IndependentEvents:
    """Independent events with P(event n) = schedule(n) for n = 1..horizon.

    ``prob_schedule`` is a callable n -> probability or a sequence indexed
    n-1.  The coordinate value process counts occurrences so far."""

    prob_schedule: Union[Callable[[int], Scalar], Sequence[Scalar]]

    def prob(self, n: int, history: tuple = ()) -> Scalar:
        if callable(self.prob_schedule):
            p = self.prob_schedule(n)
        else:
            p = self.prob_schedule[n - 1]
        if not 0 <= p <= 1:
            raise ValueError(f"schedule produced probability {p!r} outside [0, 1]")
        return p


@dataclass(frozen=True)
class CustomSpec:
    """Arbitrary finite-branching model via callbacks (in-process only).

    ``transition(n, state)`` lists (probability, next_state) branches for
    step n >= 1; ``value_of(state)`` reads the tracked scalar."""

    initial_state: object
    transition: Callable[[int, object], Sequence[tuple]]
    value_of: Callable[[object], Scalar]


TrajectoryModel = Union[FairWalk, BiasedWalk, PolyaUrn, BettingProcess, IndependentEvents, CustomSpec]


@dataclass(frozen=True)
class RunConfig:
    seed: int
    trials: int
    horizon: int
    checkpoint_schedule: tuple = ()

    def __post_init__(self) -> None:
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must fit in 64 bits")
        if self.trials < 1 or self.horizon < 0:
            raise ValueError("need trials >= 1 and horizon >= 0")
        for c in self.checkpoint_schedule:
            if not 0 <= c <= self.horizon:
                raise ValueError("checkpoints must lie within the horizon")


# ---------------------------------------------------------------------------
# Exact path-space enumeration
# ---------------------------------------------------------------------------


def _initial_state(model: TrajectoryModel, mode: Mode):
    if isinstance(model, (FairWalk, BiasedWalk)):
        return coerce_scalar(0, mode)
    if isinstance(model, PolyaUrn):
        return (model.initial_red, model.initial_black)
    if isinstance(model, BettingProcess):
        return (coerce_scalar(model.initial_wealth, mode), ())
    if isinstance(model, IndependentEvents):
        return 0  # occurrences so far
    if isinstance(model, CustomSpec):
        return model.initial_state
    raise TypeError(f"unknown model {model!r}")


def _branches(model: TrajectoryModel, n: int, state, mode: Mode) -> list:
    """(probability, next_state) per branch for step n (1-based); the
    'positive' branch (up / red / occur) is listed first."""
    half = Fraction(1, 2) if mode == "exact" else 0.5
    if isinstance(model, FairWalk):
        s = coerce_scalar(model.step, mode)
        return [(half, state + s), (half, state - s)]
    if isinstance(model, BiasedWalk):
        p = coerce_scalar(model.p_up, mode)
        s = coerce_scalar(model.step, mode)
        return [(p, state + s), (1 - p, state - s)]
    if isinstance(model, PolyaUrn):
        r, b = state
        p_red = Fraction(r, r + b) if mode == "exact" else r / (r + b)
        return [(p_red, (r + 1, b)), (1 - p_red, (r, b + 1))]
    if isinstance(model, BettingProcess):
        wealth, hist = state
        stake = coerce_scalar(model.stake_rule(n, hist), mode)
        return [(half, (wealth + stake, hist + (1,))), (half, (wealth - stake, hist + (-1,)))]
    if isinstance(model, IndependentEvents):
        p = coerce_scalar(model.prob(n), mode)
        return [(p, state + 1), (1 - p, state)]
    if isinstance(model, CustomSpec):
        out = [(coerce_scalar(p, mode), s) for p, s in model.transition(n, state)]
        if not out:
            raise ValueError("CustomSpec transition produced no branches")
        return out
    raise TypeError(f"unknown model {model!r}")


def _state_value(model: TrajectoryModel, state, mode: Mode) -> Scalar:
    if isinstance(model, (FairWalk, BiasedWalk)):
        return state
    if isinstance(model, PolyaUrn):
        r, b = state
        return Fraction(r, r + b) if mode == "exact" else r / (r + b)
    if isinstance(model, BettingProcess):
        return state[0]
    if isinstance(model, IndependentEvents):
        return coerce_scalar(state, mode)
    if isinstance(model, CustomSpec):
        return coerce_scalar(model.value_of(state), mode)
    raise TypeError(f"unknown model {model!r}")


def exhaustive_space(
    model: TrajectoryModel,
    horizon: int,
    mode: Mode = "exact",
    cap: int = EXHAUSTIVE_LEAF_CAP,
) -> tuple:
    """(space, process, filtration) for the full path tree up to ``horizon``.

    Atoms are leaves in depth-first branch order (first-listed branch first),
    weights are products of branch probabilities (summing to 1 exactly in
    exact mode), the process tracks each path's value history, and the
    filtration is the natural one generated by those histories.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    # breadth-first unroll: level n holds (state, weight, value history) per
    # partial path, in branch-digit order
    init = _initial_state(model, mode)
    level = [(init, coerce_scalar(1, mode), (_state_value(model, init, mode),))]
    for n in range(1, horizon + 1):
        nxt = []
        for state, wgt, hist in level:
            for p, s2 in _branches(model, n, state, mode):
                nxt.append((s2, wgt * p, hist + (_state_value(model, s2, mode),)))
            if len(nxt) > cap:
                raise ValueError(
                    f"path tree exceeds the {cap}-leaf cap at depth {n}"
                )
        level = nxt
    weights = [wgt for _, wgt, _ in level]
    space = FiniteMeasureSpace.from_weights(weights, mode)
    rows = tuple(
        tuple(level[w][2][n] for w in range(len(level))) for n in range(horizon + 1)
    )
    f = Process(values=rows, mode=mode)
    return space, f, natural_filtration(f)


# ---------------------------------------------------------------------------
# Seeded simulation
# ---------------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of scheduling."""
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, trial], dtype=np.uint64))
    )


def _uniform_block(seed: int, start: int, count: int, horizon: int) -> np.ndarray:
    """U[i, t] = t-th uniform of trial start+i, drawn from its own stream."""
    out = np.empty((count, horizon), dtype=np.float64)
    for i in range(count):
        out[i] = trial_rng(seed, start + i).random(horizon)
    return out


def _paths_block(model: TrajectoryModel, seed: int, start: int, count: int, horizon: int) -> np.ndarray:
    """Trajectory values for trials [start, start+count) as (count, horizon+1)."""
    if isinstance(model, (FairWalk, BiasedWalk)):
        p_up = 0.5 if isinstance(model, FairWalk) else float(model.p_up)
        step = float(model.step)
        u = _uniform_block(seed, start, count, horizon)
        out = np.empty((count, horizon + 1), dtype=np.float64)
        out[:, 0] = 0.0
        np.cumsum(np.where(u < p_up, step, -step), axis=1, out=out[:, 1:])
        return out
    if isinstance(model, PolyaUrn):
        u = _uniform_block(seed, start, count, horizon)
        out = np.empty((count, horizon + 1), dtype=np.float64)
        r = np.full(count, float(model.initial_red))
        b = np.full(count, float(model.initial_black))
        out[:, 0] = r / (r + b)
        for t in range(horizon):
            red = u[:, t] < r / (r + b)
            r += red
            b += ~red
            out[:, t + 1] = r / (r + b)
        return out
    if isinstance(model, IndependentEvents):
        probs = np.array([float(model.prob(n)) for n in range(1, horizon + 1)])
        u = _uniform_block(seed, start, count, horizon)
        out = np.empty((count, horizon + 1), dtype=np.float64)
        out[:, 0] = 0.0
        np.cumsum((u < probs[None, :]).astype(np.float64), axis=1, out=out[:, 1:])
        return out
    if isinstance(model, (BettingProcess, CustomSpec)):
        # callback models run one trial at a time (desk scale)
        out = np.empty((count, horizon + 1), dtype=np.float64)
        for i in range(count):
            rng = trial_rng(seed, start + i)
            u = rng.random(horizon)
            if isinstance(model, BettingProcess):
                wealth = float(model.initial_wealth)
                hist: tuple = ()
                out[i, 0] = wealth
                for n in range(1, horizon + 1):
                    stake = float(model.stake_rule(n, hist))
                    flip = 1 if u[n - 1] < 0.5 else -1
                    wealth += stake * flip
                    hist = hist + (flip,)
                    out[i, n] = wealth
            else:
                state = model.initial_state
                out[i, 0] = float(model.value_of(state))
                for n in range(1, horizon + 1):
                    branches = model.transition(n, state)
                    x = u[n - 1]
                    acc = 0.0
                    state = branches[-1][1]
                    for p, s2 in branches:
                        acc += float(p)
                        if x < acc:
                            state = s2
                            break
                    out[i, n] = float(model.value_of(state))
        return out
    raise TypeError(f"unknown model {model!r}")


@dataclass(frozen=True)
class TrajectoryBatch:
    values: np.ndarray  # (trials, horizon + 1) float64
    config: RunConfig

    @property
    def trials(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1] - 1


def simulate(model: TrajectoryModel, config: RunConfig) -> TrajectoryBatch:
    """Full trajectory array; per-trial streams keyed by (seed, trial)."""
    values = _paths_block(model, config.seed, 0, config.trials, config.horizon)
    return TrajectoryBatch(values=values, config=config)


def count_upcrossings_batch(paths: np.ndarray, a: float, b: float, N: Optional[int] = None) -> np.ndarray:
    """Upcrossings of (a, b) completed strictly before N, per trajectory row.

    Vectorized single-pass state machine; matches the exact recursion's
    ``upcrossings_before`` for a < b.
    """
    if N is None:
        N = paths.shape[1] - 1
    waiting = np.zeros(paths.shape[0], dtype=bool)
    counts = np.zeros(paths.shape[0], dtype=np.int64)
    for t in range(N):
        col = paths[:, t]
        complete = waiting & (col >= b)
        counts += complete
        waiting = (waiting & ~complete) | (col <= a)
    return counts


@dataclass(frozen=True)
class TrajectoryStats:
    """Per-trial summaries, trial-indexed arrays in trial order."""

    config: RunConfig
    final: np.ndarray  # value at the horizon
    sup_abs: np.ndarray  # sup_n |f_n|
    window: Optional[int]
    window_osc: Optional[np.ndarray]  # max - min over the last `window` values
    bands: tuple
    band_counts: dict  # (a, b) -> int64 array of upcrossing counts
    checkpoint_values: Optional[np.ndarray]  # (len(schedule), trials)


def simulate_stats(
    model: TrajectoryModel,
    config: RunConfig,
    window: Optional[int] = None,
    bands: Sequence[tuple] = (),
    block_size: int = 1024,
    workers: int = 1,
) -> TrajectoryStats:
    """Blockwise simulation keeping only summaries.

    Equal results for every ``workers``/``block_size`` choice: each trial's
    stream depends only on (seed, trial index) and all aggregates are simple
    per-trial values assembled in trial order.
    """
    trials, horizon = config.trials, config.horizon
    if window is not None and not 1 <= window <= horizon + 1:
        raise ValueError("window must cover between 1 and horizon+1 values")
    bands = tuple((float(a), float(b)) for a, b in bands)
    schedule = tuple(config.checkpoint_schedule)

    blocks = [(s, min(block_size, trials - s)) for s in range(0, trials, block_size)]

    def work(blk):
        start, count = blk
        paths = _paths_block(model, config.seed, start, count, horizon)
        res = {
            "start": start,
            "final": paths[:, -1].copy(),
            "sup_abs": np.abs(paths).max(axis=1),
        }
        if window is not None:
            tail = paths[:, horizon + 1 - window :]
            res["window_osc"] = tail.max(axis=1) - tail.min(axis=1)
        if schedule:
            res["checkpoints"] = paths[:, list(schedule)].T.copy()
        for a, b in bands:
            res[("band", a, b)] = count_upcrossings_batch(paths, a, b)
        return res

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(blk) for blk in blocks]
    results.sort(key=lambda r: r["start"])

    final = np.concatenate([r["final"] for r in results])
    sup_abs = np.concatenate([r["sup_abs"] for r in results])
    window_osc = (
        np.concatenate([r["window_osc"] for r in results]) if window is not None else None
    )
    checkpoints = (
        np.concatenate([r["checkpoints"] for r in results], axis=1) if schedule else None
    )
    band_counts = {
        (a, b): np.concatenate([r[("band", a, b)] for r in results]) for a, b in bands
    }
    return TrajectoryStats(
        config=config,
        final=final,
        sup_abs=sup_abs,
        window=window,
        window_osc=window_osc,
        bands=bands,
        band_counts=band_counts,
        checkpoint_values=checkpoints,
    )
