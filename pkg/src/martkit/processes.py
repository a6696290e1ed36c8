"""Filtrations, processes, martingale classification, Doob decomposition.

A filtration here is a finite monotone sequence of partitions, each bounded
by an ambient partition.  A process is a time-major table of values, one row
per time 0..horizon.  Classification compares ``condexp(f_j | steps[i])``
with ``f_i`` almost everywhere over *all* pairs ``i <= j``; the tower rule
makes the consecutive-pair check equivalent, and both are provided (the
equivalence is property-tested, not assumed silently).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .condexp import condexp
from .measure import (
    FiniteMeasureSpace,
    Partition,
    RandomVariable,
    generated_partition,
    is_measurable_wrt,
    join,
    meet,
    partition_le,
    _check_rv,
)
from .scalars import DEFAULT_FLOAT_TOL, Mode, Scalar, check_same_mode, coerce_values, zero


@dataclass(frozen=True)
class Filtration:
    """Monotone sequence of partitions bounded by an ambient partition."""

    steps: tuple
    ambient: Partition

    def __post_init__(self) -> None:
        if len(self.steps) < 1:
            raise ValueError("a filtration needs at least one step")
        for i, p in enumerate(self.steps):
            if p.atom_count != self.ambient.atom_count:
                raise ValueError("filtration steps over different atom counts")
            if not partition_le(p, self.ambient):
                raise ValueError(f"steps[{i}] is not a sub-sigma-algebra of ambient")
        for i in range(len(self.steps) - 1):
            if not partition_le(self.steps[i], self.steps[i + 1]):
                raise ValueError(f"filtration not monotone at step {i}")

    @staticmethod
    def of(steps: Iterable[Partition], ambient: Partition | None = None) -> "Filtration":
        steps = tuple(steps)
        if ambient is None:
            ambient = Partition.singletons(steps[0].atom_count)
        return Filtration(steps, ambient)

    @staticmethod
    def constant(p: Partition, horizon: int, ambient: Partition | None = None) -> "Filtration":
        return Filtration.of([p] * (horizon + 1), ambient)

    @property
    def horizon(self) -> int:
        return len(self.steps) - 1

    @property
    def atom_count(self) -> int:
        return self.ambient.atom_count


@dataclass(frozen=True)
class Process:
    """Time-major value table: values[n][atom] for n = 0..horizon."""

    values: tuple
    mode: Mode

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError("a process needs at least one time row")
        widths = {len(row) for row in self.values}
        if len(widths) != 1:
            raise ValueError("ragged process rows")

    @staticmethod
    def from_values(rows: Iterable[Iterable[Scalar]], mode: Mode) -> "Process":
        return Process(tuple(coerce_values(row, mode) for row in rows), mode)

    @staticmethod
    def from_path(path: Iterable[Scalar], mode: Mode = "exact") -> "Process":
        """Deterministic single-atom process from one trajectory."""
        return Process.from_values([[v] for v in path], mode)

    @staticmethod
    def from_rvs(rows: Iterable[RandomVariable]) -> "Process":
        rows = list(rows)
        mode = check_same_mode(*[r.mode for r in rows])
        return Process(tuple(r.values for r in rows), mode)

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    @property
    def atom_count(self) -> int:
        return len(self.values[0])

    def at(self, n: int) -> RandomVariable:
        return RandomVariable(self.values[n], self.mode)

    def rows(self) -> tuple:
        return tuple(self.at(n) for n in range(self.horizon + 1))

    def __sub__(self, other: "Process") -> "Process":
        check_same_mode(self.mode, other.mode)
        if len(self.values) != len(other.values) or self.atom_count != other.atom_count:
            raise ValueError("process shapes differ")
        return Process(
            tuple(
                tuple(a - b for a, b in zip(ra, rb))
                for ra, rb in zip(self.values, other.values)
            ),
            self.mode,
        )

    def path(self, atom: int) -> tuple:
        return tuple(row[atom] for row in self.values)


def _check_process(space: FiniteMeasureSpace, f: Process, F: Filtration) -> None:
    check_same_mode(space.mode, f.mode)
    if f.atom_count != space.atom_count or F.atom_count != space.atom_count:
        raise ValueError("atom counts differ between space, process, filtration")
    if f.horizon != F.horizon:
        raise ValueError(f"process horizon {f.horizon} != filtration horizon {F.horizon}")


def is_adapted(f: Process, F: Filtration) -> bool:
    if f.horizon != F.horizon or f.atom_count != F.atom_count:
        raise ValueError("process and filtration shapes differ")
    return all(is_measurable_wrt(f.at(n), F.steps[n]) for n in range(f.horizon + 1))


def is_predictable(c: Process, F: Filtration) -> bool:
    """c_0 measurable at step 0 and c_{n+1} measurable at step n."""
    if c.horizon != F.horizon or c.atom_count != F.atom_count:
        raise ValueError("process and filtration shapes differ")
    if not is_measurable_wrt(c.at(0), F.steps[0]):
        return False
    return all(is_measurable_wrt(c.at(n + 1), F.steps[n]) for n in range(c.horizon))


def filtration_sup(F: Filtration) -> Partition:
    """Join of all steps; by monotonicity this equals the last step."""
    out = F.steps[0]
    for p in F.steps[1:]:
        out = join(out, p)
    return out


def natural_filtration(f: Process, ambient: Partition | None = None) -> Filtration:
    """Smallest filtration making f adapted, bounded by ambient."""
    if ambient is None:
        ambient = Partition.singletons(f.atom_count)
    steps = []
    current = generated_partition(f.at(0))
    for n in range(f.horizon + 1):
        if n > 0:
            current = join(current, generated_partition(f.at(n)))
        step = current if partition_le(current, ambient) else meet(current, ambient)
        steps.append(step)
    return Filtration(tuple(steps), ambient)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


class MartingaleClass(enum.Enum):
    MARTINGALE = "martingale"
    SUBMARTINGALE = "submartingale"
    SUPERMARTINGALE = "supermartingale"
    NONE = "none"


@dataclass(frozen=True)
class Classification:
    """Outcome of classify(): strongest class plus first violation witnesses.

    ``sub_violation`` is the first (i, j, atom) with condexp(f_j|steps[i])
    strictly below f_i on a positive-weight atom (kills submartingale);
    ``super_violation`` the first strictly above (kills supermartingale).
    A martingale has neither.  ``adapted_witness`` is (n, atom-block info)
    when adaptedness itself fails, in which case the kind is NONE.
    """

    kind: MartingaleClass
    adapted: bool
    adapted_witness: tuple | None
    sub_violation: tuple | None
    super_violation: tuple | None

    def witness_against(self, asserted: MartingaleClass) -> tuple | None:
        """First (i, j, atom) contradicting an asserted class, if any."""
        if not self.adapted:
            return self.adapted_witness
        if asserted is MartingaleClass.MARTINGALE:
            return self.sub_violation or self.super_violation
        if asserted is MartingaleClass.SUBMARTINGALE:
            return self.sub_violation
        if asserted is MartingaleClass.SUPERMARTINGALE:
            return self.super_violation
        return None

    def is_at_least(self, asserted: MartingaleClass) -> bool:
        return self.adapted and self.witness_against(asserted) is None


def _adapted_witness(f: Process, F: Filtration) -> tuple | None:
    for n in range(f.horizon + 1):
        if not is_measurable_wrt(f.at(n), F.steps[n]):
            blocks = F.steps[n].blocks()
            for block in blocks:
                vals = {f.values[n][a] for a in block}
                if len(vals) > 1:
                    return (n, block[0])
    return None


def classify(
    space: FiniteMeasureSpace,
    f: Process,
    F: Filtration,
    pairs: str = "all",
    tol: float | None = None,
) -> Classification:
    """Classify f against F as (sub/super)martingale or none, with witnesses.

    ``pairs="all"`` compares condexp(f_j | steps[i]) with f_i for every
    i <= j (the defining form); ``pairs="consecutive"`` checks only
    j = i + 1, which the tower rule proves equivalent.
    """
    _check_process(space, f, F)
    if pairs not in ("all", "consecutive"):
        raise ValueError("pairs must be 'all' or 'consecutive'")
    aw = _adapted_witness(f, F)
    if aw is not None:
        return Classification(MartingaleClass.NONE, False, aw, None, None)
    t = (DEFAULT_FLOAT_TOL if tol is None else tol) if space.mode == "float" else 0
    sub_violation = None
    super_violation = None
    for i in range(f.horizon + 1):
        j_range = range(i, f.horizon + 1) if pairs == "all" else range(i, min(i + 2, f.horizon + 1))
        for j in j_range:
            ce = condexp(space, f.at(j), F.steps[i], F.ambient)
            for atom, w in enumerate(space.weights):
                if w == 0:
                    continue
                d = ce.values[atom] - f.values[i][atom]
                if sub_violation is None and d < -t:
                    sub_violation = (i, j, atom)
                if super_violation is None and d > t:
                    super_violation = (i, j, atom)
            if sub_violation is not None and super_violation is not None:
                break
        if sub_violation is not None and super_violation is not None:
            break
    if sub_violation is None and super_violation is None:
        kind = MartingaleClass.MARTINGALE
    elif sub_violation is None:
        kind = MartingaleClass.SUBMARTINGALE
    elif super_violation is None:
        kind = MartingaleClass.SUPERMARTINGALE
    else:
        kind = MartingaleClass.NONE
    return Classification(kind, True, None, sub_violation, super_violation)


# ---------------------------------------------------------------------------
# Discrete stochastic integral and Doob decomposition
# ---------------------------------------------------------------------------


def stochastic_integral(c: Process, f: Process) -> Process:
    """(c . f)_n = sum_{k<n} c_{k+1} * (f_{k+1} - f_k); row 0 is zero.

    c_0 never enters.  The result has the common horizon of c and f.
    """
    check_same_mode(c.mode, f.mode)
    if c.horizon != f.horizon or c.atom_count != f.atom_count:
        raise ValueError("integrand and integrator shapes differ")
    n_atoms = f.atom_count
    rows = [tuple([zero(f.mode)] * n_atoms)]
    acc = list(rows[0])
    for k in range(f.horizon):
        for a in range(n_atoms):
            acc[a] = acc[a] + c.values[k + 1][a] * (f.values[k + 1][a] - f.values[k][a])
        rows.append(tuple(acc))
    return Process(tuple(rows), f.mode)


@dataclass(frozen=True)
class DoobDecomposition:
    martingale_part: Process
    predictable_part: Process


def doob_decomposition(
    space: FiniteMeasureSpace, f: Process, F: Filtration
) -> DoobDecomposition:
    """Split an adapted process into martingale + predictable parts.

    predictable_part[n] = sum_{k<n} (condexp(f_{k+1} | steps[k]) - f_k),
    martingale_part = f - predictable_part.  The identity f = m + p holds
    bitwise by construction; the classification facts (m is a martingale,
    p is predictable, p is nondecreasing iff f is a submartingale) are
    verified by the test suite, not assumed here.
    """
    _check_process(space, f, F)
    n_atoms = f.atom_count
    pred_rows = [tuple([zero(f.mode)] * n_atoms)]
    acc = list(pred_rows[0])
    for k in range(f.horizon):
        ce = condexp(space, f.at(k + 1), F.steps[k], F.ambient)
        for a in range(n_atoms):
            acc[a] = acc[a] + ce.values[a] - f.values[k][a]
        pred_rows.append(tuple(acc))
    predictable = Process(tuple(pred_rows), f.mode)
    martingale = f - predictable
    return DoobDecomposition(martingale_part=martingale, predictable_part=predictable)
