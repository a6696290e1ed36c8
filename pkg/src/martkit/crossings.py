"""Upper/lower crossing times, upcrossing counts, and the upcrossing estimate.

The crossing chain per atom: sigma_0 = 0; tau_k is the first time in
[sigma_k, N] at which the path is <= a; sigma_{k+1} the first time in
[tau_k, N] at which it is >= b.  Both hitting scans fall back to N, so the
chain is nondecreasing and interleaved, 0 = sigma_0 <= tau_0 <= sigma_1 <= ...
and stabilizes: once sigma_{k+1} == sigma_k every later row repeats.

``upcrossings_before(a, b, f, N)`` is the largest n in 0..N with sigma_n < N
(0 when N = 0).  For a < b this counts the upcrossings of the band completed
strictly before N; a >= b is deliberately allowed, the estimate's left side
is then nonpositive.

The recursion here is the production implementation; the independent
single-pass state machine lives in the test suite as its oracle, and a
vectorized counter for Monte Carlo batches in :mod:`martkit.montecarlo`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .measure import FiniteMeasureSpace, RandomVariable, integral
from .processes import Classification, Filtration, MartingaleClass, Process, classify
from .scalars import Scalar, coerce_scalar, ext_mul, of_real, positive_part

__all__ = [
    "Band",
    "CrossingTable",
    "crossing_table",
    "upper_crossing",
    "lower_crossing",
    "upcrossings_before",
    "upcrossings",
    "UpcrossingEstimateReport",
    "check_upcrossing_estimate",
    "UpcrossingSupReport",
    "check_upcrossing_estimate_sup",
    "BandTranslationReport",
    "band_translation_identity",
]


@dataclass(frozen=True)
class Band:
    """Value band (a, b).  a < b is deliberately not required; the estimate
    stays valid (and vacuous) for a >= b."""

    a: Scalar
    b: Scalar

    def coerced(self, mode) -> "Band":
        return Band(a=coerce_scalar(self.a, mode), b=coerce_scalar(self.b, mode))


@dataclass(frozen=True)
class CrossingTable:
    """sigma/tau values by recursion row: sigma[k][atom], tau[k][atom]."""

    sigma: tuple
    tau: tuple
    N: int

    def validate(self) -> None:
        """Chain inequalities 0 = sigma_0 <= tau_0 <= sigma_1 <= ... <= N."""
        atoms = range(len(self.sigma[0]))
        for w in atoms:
            if self.sigma[0][w] != 0:
                raise AssertionError("sigma_0 must be 0")
            prev = 0
            for k in range(len(self.sigma)):
                s, t = self.sigma[k][w], self.tau[k][w]
                if not (prev <= s <= t <= self.N):
                    raise AssertionError(f"chain order violated at row {k}, atom {w}")
                prev = t


# ---------------------------------------------------------------------------
# Chain construction.  All scans run on precomputed hit masks so that exact
# (Fraction) values are compared against the band once per time index, not
# once per recursion row.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _hit_masks(band: Band, f: Process) -> tuple:
    """Per atom: (le_a, ge_b) boolean tuples over time 0..horizon."""
    bd = band.coerced(f.mode)
    out = []
    for w in range(f.atom_count):
        le_a = tuple(f.values[t][w] <= bd.a for t in range(f.horizon + 1))
        ge_b = tuple(f.values[t][w] >= bd.b for t in range(f.horizon + 1))
        out.append((le_a, ge_b))
    return tuple(out)


def _scan(mask: tuple, n: int, m: int) -> int:
    for j in range(n, m + 1):
        if mask[j]:
            return j
    return m


def _atom_chain(le_a: tuple, ge_b: tuple, N: int) -> tuple:
    """(sigmas, taus) rows until stabilization (sigma row repeats)."""
    sigmas = [0]
    taus = []
    while True:
        s = sigmas[-1]
        t = _scan(le_a, s, N)
        taus.append(t)
        s2 = _scan(ge_b, t, N)
        sigmas.append(s2)
        if s2 == s:
            return tuple(sigmas), tuple(taus)


@lru_cache(maxsize=4096)
def _chains(band: Band, f: Process, N: int) -> tuple:
    if not 0 <= N <= f.horizon:
        raise ValueError("N must lie within the horizon")
    masks = _hit_masks(band, f)
    return tuple(_atom_chain(le_a, ge_b, N) for (le_a, ge_b) in masks)


def _sigma_at(chain: tuple, n: int) -> int:
    sigmas = chain[0]
    return sigmas[min(n, len(sigmas) - 1)]


def _tau_at(chain: tuple, n: int) -> int:
    taus = chain[1]
    return taus[min(n, len(taus) - 1)]


def crossing_table(band: Band, f: Process, N: int) -> CrossingTable:
    """Materialize the chain rows up to (and including) the first repeat."""
    chains = _chains(band, f, N)
    rows = max(len(c[0]) for c in chains)
    sigma = tuple(
        tuple(_sigma_at(c, k) for c in chains) for k in range(rows)
    )
    tau = tuple(
        tuple(_tau_at(c, k) for c in chains) for k in range(rows)
    )
    return CrossingTable(sigma=sigma, tau=tau, N=N)


def upper_crossing(band: Band, f: Process, N: int, n: int) -> tuple:
    """sigma_n per atom: time the n-th upcrossing of the band completes
    (0 for n = 0, N once the chain has run out of crossings)."""
    return tuple(_sigma_at(c, n) for c in _chains(band, f, N))


def lower_crossing(band: Band, f: Process, N: int, n: int) -> tuple:
    """tau_n per atom: first visit below a at or after sigma_n."""
    return tuple(_tau_at(c, n) for c in _chains(band, f, N))


def _upcrossings_before_atom(sigmas: tuple, N: int) -> int:
    if N == 0:
        return 0
    if sigmas[-1] < N:
        # chain stabilized strictly below N: sigma_n < N for every n <= N,
        # so the bounded scan tops out at N (reachable only when a >= b)
        return N
    for r, s in enumerate(sigmas):
        if s >= N:
            return r - 1
    raise AssertionError("unreachable: chain neither stabilized nor reached N")


def upcrossings_before(band: Band, f: Process, N: int) -> tuple:
    """Largest n in 0..N with sigma_n < N, per atom (0 when N = 0)."""
    return tuple(_upcrossings_before_atom(c[0], N) for c in _chains(band, f, N))


def upcrossings(band: Band, f: Process) -> tuple:
    """Supremum over N <= horizon of upcrossings_before, per atom.

    The codomain mirrors an extended nonnegative count; on a finite horizon
    the value is always a finite int.
    """
    best = [0] * f.atom_count
    for N in range(f.horizon + 1):
        for w, u in enumerate(upcrossings_before(band, f, N)):
            if u > best[w]:
                best[w] = u
    return tuple(best)


# ---------------------------------------------------------------------------
# The upcrossing estimate
# ---------------------------------------------------------------------------


def _require_submartingale(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    classification: Optional[Classification],
    tol: Optional[float],
) -> Classification:
    cls = classification if classification is not None else classify(space, f, F, tol=tol)
    if not cls.is_at_least(MartingaleClass.SUBMARTINGALE):
        raise ValueError("the upcrossing estimate requires a submartingale or martingale")
    return cls


@dataclass(frozen=True)
class UpcrossingEstimateReport:
    a: Scalar
    b: Scalar
    N: int
    lhs: Scalar  # (b - a) * integral of upcrossings_before
    rhs: Scalar  # integral of (f_N - a)^+
    holds: bool


def check_upcrossing_estimate(
    space: FiniteMeasureSpace,
    band: Band,
    f: Process,
    F: Filtration,
    N: int,
    classification: Optional[Classification] = None,
    tol: Optional[float] = None,
) -> UpcrossingEstimateReport:
    """(b - a) * mu[U_N] <= mu[(f_N - a)^+] for submartingales.

    a >= b is allowed: the left side is then nonpositive and the right side
    nonnegative, so the inequality is automatic.
    """
    _require_submartingale(space, f, F, classification, tol)
    bd = band.coerced(f.mode)
    counts = upcrossings_before(band, f, N)
    u = RandomVariable(
        values=tuple(coerce_scalar(c, f.mode) for c in counts), mode=f.mode
    )
    lhs = (bd.b - bd.a) * integral(space, u)
    shifted = f.at(N).shift(-bd.a).positive_part()
    rhs = integral(space, shifted)
    eps = 0 if space.mode == "exact" else (1e-9 if tol is None else tol)
    return UpcrossingEstimateReport(a=bd.a, b=bd.b, N=N, lhs=lhs, rhs=rhs, holds=lhs <= rhs + eps)


@dataclass(frozen=True)
class UpcrossingSupReport:
    a: Scalar
    b: Scalar
    coefficient: Scalar  # (b - a)^+ as an extended nonnegative scalar
    lhs: Scalar
    rhs: Scalar
    argmax_n: int  # the N realizing the right-side supremum
    holds: bool


def check_upcrossing_estimate_sup(
    space: FiniteMeasureSpace,
    band: Band,
    f: Process,
    F: Filtration,
    classification: Optional[Classification] = None,
    tol: Optional[float] = None,
    check_classification: bool = True,
) -> UpcrossingSupReport:
    """Sup form: (b-a)^+ * lintegral(upcrossings) <= sup_N lintegral((f_N - a)^+).

    Extended nonnegative arithmetic with 0 * inf = 0; on a finite horizon all
    quantities are finite.  ``check_classification=False`` skips the
    submartingale gate and evaluates the arithmetic only (the inequality is
    not guaranteed then).
    """
    if check_classification:
        _require_submartingale(space, f, F, classification, tol)
    bd = band.coerced(f.mode)
    coeff = of_real(bd.b - bd.a)
    counts = upcrossings(band, f)
    u = RandomVariable(
        values=tuple(coerce_scalar(c, f.mode) for c in counts), mode=f.mode
    )
    lhs = ext_mul(coeff, integral(space, u))
    best = None
    best_n = 0
    for N in range(f.horizon + 1):
        val = integral(space, f.at(N).shift(-bd.a).positive_part())
        if best is None or val > best:
            best, best_n = val, N
    eps = 0 if space.mode == "exact" else (1e-9 if tol is None else tol)
    return UpcrossingSupReport(
        a=bd.a,
        b=bd.b,
        coefficient=coeff,
        lhs=lhs,
        rhs=best,
        argmax_n=best_n,
        holds=lhs <= best + eps,
    )


# ---------------------------------------------------------------------------
# Band translation identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandTranslationReport:
    holds: bool
    first_mismatch: Optional[tuple]  # (N, atom, lhs_count, rhs_count)


def band_translation_identity(band: Band, f: Process) -> BandTranslationReport:
    """Crossings of (a, b) by f equal crossings of (0, b-a) by (f - a)^+,
    per atom, at every N <= horizon.  Requires a < b."""
    bd = band.coerced(f.mode)
    if not bd.a < bd.b:
        raise ValueError("band translation requires a < b")
    g = Process(
        values=tuple(
            tuple(positive_part(v - bd.a) for v in row) for row in f.values
        ),
        mode=f.mode,
    )
    shifted = Band(a=coerce_scalar(0, f.mode), b=bd.b - bd.a)
    for N in range(f.horizon + 1):
        lhs = upcrossings_before(band, f, N)
        rhs = upcrossings_before(shifted, g, N)
        if lhs != rhs:
            for w, (x, y) in enumerate(zip(lhs, rhs)):
                if x != y:
                    return BandTranslationReport(holds=False, first_mismatch=(N, w, x, y))
    return BandTranslationReport(holds=True, first_mismatch=None)
