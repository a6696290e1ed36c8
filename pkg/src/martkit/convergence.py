"""Maximal inequality, limit estimation, and the convergence criteria checks.

Everything here is exact/desk scale: processes small enough to hold as
tuples, with Fraction arithmetic in exact mode.  The Monte Carlo shadows of
these checks (Polya-urn window convergence, fair-walk band-violation decay)
run on streaming statistics produced by :mod:`martkit.montecarlo`.

The limit process is realized as a windowed-oscillation estimator: an atom
whose final ``window`` values oscillate within ``tol`` is declared converged
with the final value as its limit; every other atom gets 0, mirroring the
default branch of a non-computational choice function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .condexp import condexp
from .measure import (
    DEFAULT_FLOAT_TOL,
    FiniteMeasureSpace,
    Partition,
    RandomVariable,
    ae_witness,
    integral,
    measure,
    set_integral,
    snorm,
)
from .crossings import Band, upcrossings_before
from .processes import (
    Classification,
    Filtration,
    MartingaleClass,
    Process,
    classify,
    filtration_sup,
)
from .scalars import Scalar, coerce_scalar

__all__ = [
    "MaximalInequalityReport",
    "check_maximal_inequality",
    "LimitEstimate",
    "limit_process_estimate",
    "ConvergenceDiagnostic",
    "ae_convergence_diagnostic",
    "geometric_checkpoints",
    "L1ConvergenceAReport",
    "check_l1_convergence_a",
    "L1ConvergenceBReport",
    "check_l1_convergence_b",
    "LevyUpwardReport",
    "check_levy_upward",
    "FatouReport",
    "fatou_norm_check",
]


def _tol_for(space: FiniteMeasureSpace, tol: Optional[float]) -> Scalar:
    if space.mode == "exact":
        return 0
    return DEFAULT_FLOAT_TOL if tol is None else tol


# ---------------------------------------------------------------------------
# Maximal inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaximalInequalityReport:
    n: int
    level: Scalar
    set_mass: Scalar
    lhs: Scalar  # level * mu{max_{k<=n} f_k >= level}
    rhs: Scalar  # integral of f_n over that set
    holds: bool


def check_maximal_inequality(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    n: int,
    level: Scalar,
    classification: Optional[Classification] = None,
    tol: Optional[float] = None,
) -> MaximalInequalityReport:
    """lambda * mu{max_{k<=n} f_k >= lambda} <= integral of f_n over the set,
    for submartingales and lambda > 0."""
    lam = coerce_scalar(level, space.mode)
    if not lam > 0:
        raise ValueError("the maximal inequality needs a level > 0")
    if not 0 <= n <= f.horizon:
        raise ValueError("n must lie within the horizon")
    cls = classification if classification is not None else classify(space, f, F, tol=tol)
    if not cls.is_at_least(MartingaleClass.SUBMARTINGALE):
        raise ValueError("the maximal inequality requires a submartingale or martingale")
    running = [max(f.values[k][w] for k in range(n + 1)) for w in range(f.atom_count)]
    level_set = frozenset(w for w, m in enumerate(running) if m >= lam)
    mass = measure(space, level_set)
    lhs = lam * mass
    rhs = set_integral(space, f.at(n), level_set)
    eps = _tol_for(space, tol)
    return MaximalInequalityReport(
        n=n, level=lam, set_mass=mass, lhs=lhs, rhs=rhs, holds=lhs <= rhs + eps
    )


# ---------------------------------------------------------------------------
# Limit process estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitEstimate:
    values: RandomVariable
    converged_mask: frozenset
    sup_partition: Partition


def limit_process_estimate(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    tol: Scalar,
    window: int,
) -> LimitEstimate:
    """Windowed-oscillation limit estimator.

    Per atom: when the last ``window`` values oscillate within ``tol`` the
    estimate is the final value and the atom is marked converged; otherwise
    the estimate defaults to 0.
    """
    if not 1 <= window <= f.horizon + 1:
        raise ValueError("window must cover between 1 and horizon+1 values")
    tol = coerce_scalar(tol, space.mode)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    start = f.horizon + 1 - window
    out = []
    converged = set()
    z = coerce_scalar(0, space.mode)
    for w in range(f.atom_count):
        tail = [f.values[n][w] for n in range(start, f.horizon + 1)]
        if max(tail) - min(tail) <= tol:
            out.append(f.values[f.horizon][w])
            converged.add(w)
        else:
            out.append(z)
    return LimitEstimate(
        values=RandomVariable(values=tuple(out), mode=space.mode),
        converged_mask=frozenset(converged),
        sup_partition=filtration_sup(F),
    )


# ---------------------------------------------------------------------------
# a.e. convergence diagnostics
# ---------------------------------------------------------------------------


def geometric_checkpoints(horizon: int) -> tuple:
    """1, 2, 4, ... capped by and always including the horizon."""
    out = []
    n = 1
    while n < horizon:
        out.append(n)
        n *= 2
    out.append(horizon)
    return tuple(out)


@dataclass(frozen=True)
class ConvergenceDiagnostic:
    cutoff: Scalar
    bounded_fraction: Scalar  # fraction of mass with sup_n |f_n| <= cutoff
    unbounded_measure: Scalar
    band_violations: tuple  # (band, ((k, measure of {U >= k}), ...))
    cauchy_gap: tuple  # (n, m, snorm(f_n - f_m, 1)) over consecutive checkpoints
    chain_bounds: Optional[tuple]  # (band, mu[U], bound, holds) when R supplied


def ae_convergence_diagnostic(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    cutoff: Scalar,
    bands: Sequence[Band],
    l1_bound: Optional[Scalar] = None,
    checkpoints: Optional[Sequence[int]] = None,
) -> ConvergenceDiagnostic:
    """Boundedness, band-violation, and Cauchy-gap diagnostics.

    Per band the report measures {upcrossings_before(a, b, f, horizon) >= k}
    for k = 1, 2, 4, ...; an a.e.-convergent process drives these to zero.
    With an L1 bound R it also verifies mu[U] <= (R + |a| mu(Omega)) / (b-a)
    on every band with a < b.
    """
    cutoff = coerce_scalar(cutoff, space.mode)
    sup_abs = [
        max(abs(f.values[n][w]) for n in range(f.horizon + 1))
        for w in range(f.atom_count)
    ]
    unbounded = frozenset(w for w, m in enumerate(sup_abs) if m > cutoff)
    unbounded_measure = measure(space, unbounded)
    total = space.total
    bounded_fraction = (
        (total - unbounded_measure) / total if total > 0 else coerce_scalar(0, space.mode)
    )

    ks = []
    k = 1
    while k <= f.horizon or k == 1:
        ks.append(k)
        if k > f.horizon:
            break
        k *= 2
    band_rows = []
    chain_rows = [] if l1_bound is not None else None
    for band in bands:
        counts = upcrossings_before(band, f, f.horizon)
        row = tuple(
            (k, measure(space, frozenset(w for w, u in enumerate(counts) if u >= k)))
            for k in ks
        )
        band_rows.append((band, row))
        if l1_bound is not None:
            bd = band.coerced(space.mode)
            if bd.a < bd.b:
                u_rv = RandomVariable(
                    values=tuple(coerce_scalar(c, space.mode) for c in counts),
                    mode=space.mode,
                )
                mu_u = integral(space, u_rv)
                bound = (coerce_scalar(l1_bound, space.mode) + abs(bd.a) * total) / (
                    bd.b - bd.a
                )
                chain_rows.append((band, mu_u, bound, bool(mu_u <= bound)))

    cps = tuple(checkpoints) if checkpoints is not None else geometric_checkpoints(f.horizon)
    gaps = []
    for i in range(len(cps) - 1):
        n, m = cps[i], cps[i + 1]
        gaps.append((n, m, snorm(space, f.at(m) - f.at(n), 1)))
    return ConvergenceDiagnostic(
        cutoff=cutoff,
        bounded_fraction=bounded_fraction,
        unbounded_measure=unbounded_measure,
        band_violations=tuple(band_rows),
        cauchy_gap=tuple(gaps),
        chain_bounds=tuple(chain_rows) if chain_rows is not None else None,
    )


# ---------------------------------------------------------------------------
# L1 convergence checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1ConvergenceAReport:
    checkpoints: tuple
    gaps: tuple  # snorm(f_n - limit_estimate, 1) at the checkpoints
    ui_small: bool
    trend_ok: bool
    final_below_tol: bool
    holds: bool


def check_l1_convergence_a(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    ui_modulus_curve: Sequence[tuple],
    tol: Scalar,
    window: int,
    checkpoints: Optional[Sequence[int]] = None,
    ui_threshold: float = 1e-6,
    trend_slack: float = 0.0,
    classification: Optional[Classification] = None,
    require_submartingale: bool = True,
) -> L1ConvergenceAReport:
    """Conditional L1 convergence: when the family's UI modulus is small at
    its largest truncation level, snorm(f_n - limit, 1) must trend down
    across geometric checkpoints and end below tol.

    ``ui_modulus_curve`` is a sequence of (C, modulus) pairs, typically from
    :func:`martkit.uniform_integrability.probabilist_curve`.  When the
    terminal modulus is not small the assertion is vacuous (holds=True) and
    the gaps are still reported; this is the negative-control reading.
    """
    if require_submartingale:
        cls = classification if classification is not None else classify(space, f, F)
        if not cls.is_at_least(MartingaleClass.SUBMARTINGALE):
            raise ValueError("check (a) requires a submartingale or martingale")
    est = limit_process_estimate(space, f, F, tol=tol, window=window)
    cps = tuple(checkpoints) if checkpoints is not None else geometric_checkpoints(f.horizon)
    gaps = tuple(snorm(space, f.at(n) - est.values, 1) for n in cps)
    ui_small = bool(ui_modulus_curve) and float(ui_modulus_curve[-1][1]) <= ui_threshold
    trend_ok = all(
        float(gaps[i + 1]) <= float(gaps[i]) + trend_slack for i in range(len(gaps) - 1)
    )
    eps = _tol_for(space, None)
    final_below = gaps[-1] <= coerce_scalar(tol, space.mode) + eps
    holds = (not ui_small) or (trend_ok and final_below)
    return L1ConvergenceAReport(
        checkpoints=cps,
        gaps=gaps,
        ui_small=ui_small,
        trend_ok=trend_ok,
        final_below_tol=bool(final_below),
        holds=holds,
    )


@dataclass(frozen=True)
class L1ConvergenceBReport:
    holds: bool
    witness: Optional[tuple]  # (n, atom) of the first a.e. violation
    kind: MartingaleClass


def check_l1_convergence_b(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    tol: Optional[float] = None,
    classification: Optional[Classification] = None,
    allow_non_martingale: bool = False,
) -> L1ConvergenceBReport:
    """Martingale representation at the horizon: f_n = condexp(f_N | steps[n])
    a.e. for every n (the finite-filtration limit process is f_N itself)."""
    cls = classification if classification is not None else classify(space, f, F, tol=tol)
    if cls.kind != MartingaleClass.MARTINGALE and not allow_non_martingale:
        raise ValueError("check (b) is a martingale statement; classification says otherwise")
    witness = None
    ambient = F.ambient
    last = f.at(f.horizon)
    for n in range(f.horizon + 1):
        ce = condexp(space, last, F.steps[n], ambient)
        w = ae_witness(space, f.at(n), ce, "eq", tol=tol)
        if w is not None:
            witness = (n, w)
            break
    return L1ConvergenceBReport(holds=witness is None, witness=witness, kind=cls.kind)


@dataclass(frozen=True)
class LevyUpwardReport:
    d: tuple  # snorm(condexp(g | steps[n]) - g, 1) for n = 0..horizon
    monotone: bool
    final_zero: bool
    holds: bool


def check_levy_upward(
    space: FiniteMeasureSpace,
    g: RandomVariable,
    F: Filtration,
    tol: Optional[float] = None,
) -> LevyUpwardReport:
    """d_n = snorm(condexp(g | steps[n]) - g, 1): requires g measurable with
    respect to the filtration's sup; asserts the d_n are nonincreasing and
    d_horizon = 0.

    The monotonicity conjunct is asserted as specified; note the exactness
    conjunct (d_horizon = 0) is the load-bearing one on finite filtrations.
    """
    from .measure import is_measurable_wrt

    sup = filtration_sup(F)
    if not is_measurable_wrt(g, sup):
        raise ValueError("Levy upward requires g measurable w.r.t. the filtration's sup")
    ambient = F.ambient
    d = []
    for n in range(F.horizon + 1):
        ce = condexp(space, g, F.steps[n], ambient)
        d.append(snorm(space, ce - g, 1))
    eps = _tol_for(space, tol)
    monotone = all(d[i + 1] <= d[i] + eps for i in range(len(d) - 1))
    final_zero = d[-1] <= eps
    return LevyUpwardReport(
        d=tuple(d), monotone=monotone, final_zero=bool(final_zero), holds=monotone and final_zero
    )


# ---------------------------------------------------------------------------
# Fatou norm check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FatouReport:
    limit_norm: Scalar
    surrogate: Scalar  # running infimum of snorm(f_n, p) over the tail window
    tail_start: int
    curve: tuple  # snorm(f_n, p) for all n
    holds: bool


def fatou_norm_check(
    space: FiniteMeasureSpace,
    f: Process,
    g: RandomVariable,
    p: Scalar,
    tol: Optional[float] = None,
    tail_start: Optional[int] = None,
) -> FatouReport:
    """snorm(g, p) <= inf over the tail window of snorm(f_n, p).

    The tail infimum is the finite-horizon liminf surrogate; the window
    defaults to the second half of the horizon.  Precondition: f_horizon
    agrees with g on positive-weight atoms (exact in exact mode, within tol
    in float mode), the computable shadow of "f_n converges to g a.e.".
    """
    eps = _tol_for(space, tol)
    w = ae_witness(space, f.at(f.horizon), g, "eq", tol=tol)
    if w is not None:
        raise ValueError(
            f"f does not reach g at the horizon (first mismatch at atom {w})"
        )
    start = f.horizon // 2 if tail_start is None else tail_start
    if not 0 <= start <= f.horizon:
        raise ValueError("tail_start must lie within the horizon")
    curve = tuple(snorm(space, f.at(n), p) for n in range(f.horizon + 1))
    surrogate = None
    for n in range(start, f.horizon + 1):
        if surrogate is None or curve[n] < surrogate:
            surrogate = curve[n]
    limit_norm = snorm(space, g, p)
    # exact-mode norms can be irrational root forms; compare directly there
    if space.mode == "exact":
        holds = bool(limit_norm <= surrogate)
    else:
        holds = bool(limit_norm <= surrogate + eps)
    return FatouReport(
        limit_norm=limit_norm,
        surrogate=surrogate,
        tail_start=start,
        curve=curve,
        holds=holds,
    )
