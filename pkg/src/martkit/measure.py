"""Finite measure spaces, partition sigma-algebras, and random variables.

The whole toolkit works over a finite set of atoms ``{0, ..., n-1}`` with
nonnegative weights.  A sigma-algebra on such a space is exactly a partition
of the atoms; a function is measurable with respect to it iff it is constant
on every block.  "Almost everywhere" means "outside the atoms of weight 0".

Everything here is mode-aware (see :mod:`martkit.scalars`): exact mode
stores Fractions and performs no rounding; float mode stores IEEE doubles.

>>> sp = FiniteMeasureSpace.uniform(4)
>>> f = RandomVariable.exact([1, 3, 5, 7])
>>> integral(sp, f)
Fraction(4, 1)
>>> set_integral(sp, f, frozenset({0, 1}))
Fraction(1, 1)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .scalars import (
    DEFAULT_FLOAT_TOL,
    INF,
    Mode,
    ModeError,
    RootValue,
    Scalar,
    check_same_mode,
    coerce_values,
    zero,
)

AtomSet = frozenset  # frozenset[int]; atoms are indices into the weight vector


# ---------------------------------------------------------------------------
# Measure space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Finite measure on atoms 0..n-1, given by nonnegative weights."""

    weights: tuple
    mode: Mode

    def __post_init__(self) -> None:
        if len(self.weights) < 1:
            raise ValueError("a measure space needs at least one atom")
        for w in self.weights:
            if isinstance(w, float) and (w != w or w in (INF, -INF)):
                raise ValueError("weights must be finite")
            if w < 0:
                raise ValueError("weights must be nonnegative")

    @staticmethod
    def from_weights(weights: Iterable[Scalar], mode: Mode = "exact") -> "FiniteMeasureSpace":
        return FiniteMeasureSpace(coerce_values(weights, mode), mode)

    @staticmethod
    def uniform(n: int, mode: Mode = "exact") -> "FiniteMeasureSpace":
        """Uniform probability space on n atoms."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if mode == "exact":
            return FiniteMeasureSpace((Fraction(1, n),) * n, "exact")
        return FiniteMeasureSpace((1.0 / n,) * n, "float")

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> Scalar:
        return sum(self.weights, zero(self.mode))

    def is_probability(self) -> bool:
        return self.total == 1

    def positive_atoms(self) -> tuple:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def check_atoms(self, s: AtomSet) -> None:
        for a in s:
            if not (isinstance(a, int) and 0 <= a < self.atom_count):
                raise ValueError(f"atom {a!r} outside range 0..{self.atom_count - 1}")


def measure(space: FiniteMeasureSpace, s: AtomSet) -> Scalar:
    """mu(s) = sum of the weights of the atoms in s."""
    space.check_atoms(s)
    return sum((space.weights[a] for a in s), zero(space.mode))


# ---------------------------------------------------------------------------
# Random variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomVariable:
    """A function atoms -> scalars, stored densely."""

    values: tuple
    mode: Mode

    @staticmethod
    def from_values(values: Iterable[Scalar], mode: Mode) -> "RandomVariable":
        return RandomVariable(coerce_values(values, mode), mode)

    @staticmethod
    def exact(values: Iterable[Scalar]) -> "RandomVariable":
        return RandomVariable.from_values(values, "exact")

    @staticmethod
    def constant(c: Scalar, n: int, mode: Mode) -> "RandomVariable":
        return RandomVariable.from_values([c] * n, mode)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Scalar:
        return self.values[i]

    def _binop(self, other: "RandomVariable", op: Callable) -> "RandomVariable":
        check_same_mode(self.mode, other.mode)
        if len(self) != len(other):
            raise ValueError("random variables over different atom counts")
        return RandomVariable(tuple(op(a, b) for a, b in zip(self.values, other.values)), self.mode)

    def __add__(self, other: "RandomVariable") -> "RandomVariable":
        return self._binop(other, lambda a, b: a + b)

    def __sub__(self, other: "RandomVariable") -> "RandomVariable":
        return self._binop(other, lambda a, b: a - b)

    def scale(self, c: Scalar) -> "RandomVariable":
        c = coerce_values([c], self.mode)[0]
        return RandomVariable(tuple(c * v for v in self.values), self.mode)

    def shift(self, c: Scalar) -> "RandomVariable":
        c = coerce_values([c], self.mode)[0]
        return RandomVariable(tuple(v + c for v in self.values), self.mode)

    def __abs__(self) -> "RandomVariable":
        return RandomVariable(tuple(abs(v) for v in self.values), self.mode)

    def positive_part(self) -> "RandomVariable":
        z = zero(self.mode)
        return RandomVariable(tuple(v if v > z else z for v in self.values), self.mode)


def indicator(s: AtomSet, n: int, mode: Mode) -> RandomVariable:
    one = Fraction(1) if mode == "exact" else 1.0
    z = zero(mode)
    return RandomVariable(tuple(one if i in s else z for i in range(n)), mode)


def _check_rv(space: FiniteMeasureSpace, f: RandomVariable) -> None:
    check_same_mode(space.mode, f.mode)
    if len(f) != space.atom_count:
        raise ValueError(
            f"random variable has {len(f)} values but the space has {space.atom_count} atoms"
        )


def integral(space: FiniteMeasureSpace, f: RandomVariable) -> Scalar:
    """Integral of f over the whole space."""
    _check_rv(space, f)
    return sum((w * v for w, v in zip(space.weights, f.values)), zero(space.mode))


def set_integral(space: FiniteMeasureSpace, f: RandomVariable, s: AtomSet) -> Scalar:
    """Integral of f restricted to the atom set s."""
    _check_rv(space, f)
    space.check_atoms(s)
    return sum((space.weights[a] * f.values[a] for a in s), zero(space.mode))


def snorm(space: FiniteMeasureSpace, f: RandomVariable, p) -> Scalar | RootValue:
    """L^p norm of f: ``(integral |f|^p)^(1/p)``, or the essential sup at p=inf.

    Zero-weight atoms never contribute; in particular the essential supremum
    ignores them entirely.  Exact mode requires p to be a positive integer or
    inf and returns a Fraction when the norm is rational, otherwise an exact
    :class:`RootValue` in root form.  Float mode accepts any real p >= 1.
    """
    _check_rv(space, f)
    if p == INF:
        best = None
        for w, v in zip(space.weights, f.values):
            if w > 0 and (best is None or abs(v) > best):
                best = abs(v)
        return best if best is not None else zero(space.mode)
    if space.mode == "exact":
        if isinstance(p, Fraction) and p.denominator == 1:
            p = int(p)
        if not isinstance(p, int) or isinstance(p, bool) or p < 1:
            raise ValueError(
                f"exact-mode snorm requires integer p >= 1 or inf, got {p!r}"
            )
        total = sum(
            (w * abs(v) ** p for w, v in zip(space.weights, f.values)), Fraction(0)
        )
        out = RootValue.of(total, p)
        return out.as_fraction() if out.is_rational() else out
    p = float(p)
    if p < 1:
        raise ValueError(f"snorm requires p >= 1, got {p!r}")
    total = sum(w * abs(v) ** p for w, v in zip(space.weights, f.values))
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# Almost-everywhere comparisons
# ---------------------------------------------------------------------------


def ae_witness(
    space: FiniteMeasureSpace,
    f: RandomVariable,
    g: RandomVariable,
    relation: str = "eq",
    tol: float | None = None,
) -> int | None:
    """First positive-weight atom violating f <relation> g, or None.

    relation is one of "eq", "le", "ge".  Exact mode compares exactly; float
    mode allows absolute tolerance ``tol`` (default 1e-9).
    """
    _check_rv(space, f)
    _check_rv(space, g)
    if space.mode == "float":
        t = DEFAULT_FLOAT_TOL if tol is None else tol
    else:
        t = 0
    for i, w in enumerate(space.weights):
        if w == 0:
            continue
        d = f.values[i] - g.values[i]
        ok = abs(d) <= t if relation == "eq" else d <= t if relation == "le" else -d <= t
        if not ok:
            return i
    return None


def ae_equal(space, f, g, tol: float | None = None) -> bool:
    return ae_witness(space, f, g, "eq", tol) is None


def ae_le(space, f, g, tol: float | None = None) -> bool:
    return ae_witness(space, f, g, "le", tol) is None


# ---------------------------------------------------------------------------
# Partitions (sigma-algebras)
# ---------------------------------------------------------------------------


def _canonical_block_of(block_of: Sequence[int]) -> tuple:
    relabel: dict[int, int] = {}
    out = []
    for b in block_of:
        if b not in relabel:
            relabel[b] = len(relabel)
        out.append(relabel[b])
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """Partition of atoms 0..n-1; blocks are numbered by first appearance.

    The partial order used throughout: P <= Q iff every block of Q is
    contained in a block of P, i.e. Q refines P, i.e. the sigma-algebra
    generated by P is contained in the one generated by Q.
    """

    block_of: tuple

    def __post_init__(self) -> None:
        if len(self.block_of) < 1:
            raise ValueError("a partition needs at least one atom")
        if self.block_of != _canonical_block_of(self.block_of):
            raise ValueError("block_of not canonical; use Partition.of or from_blocks")

    @staticmethod
    def of(block_of: Sequence[int]) -> "Partition":
        return Partition(_canonical_block_of(block_of))

    @staticmethod
    def trivial(n: int) -> "Partition":
        return Partition((0,) * n)

    @staticmethod
    def singletons(n: int) -> "Partition":
        return Partition(tuple(range(n)))

    @staticmethod
    def from_blocks(blocks: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        blocks = [sorted(b) for b in blocks]
        atoms = [a for b in blocks for a in b]
        if n is None:
            n = len(atoms)
        if sorted(atoms) != list(range(n)):
            raise ValueError("blocks must partition atoms 0..n-1 exactly")
        block_of = [0] * n
        for bi, b in enumerate(blocks):
            if not b:
                raise ValueError("empty block")
            for a in b:
                block_of[a] = bi
        return Partition.of(block_of)

    @property
    def atom_count(self) -> int:
        return len(self.block_of)

    @property
    def block_count(self) -> int:
        return max(self.block_of) + 1

    def blocks(self) -> tuple:
        out: list[list[int]] = [[] for _ in range(self.block_count)]
        for a, b in enumerate(self.block_of):
            out[b].append(a)
        return tuple(tuple(b) for b in out)

    def block_sets(self) -> tuple:
        return tuple(frozenset(b) for b in self.blocks())


def partition_le(p: Partition, q: Partition) -> bool:
    """P <= Q iff every block of Q is contained in a block of P."""
    if p.atom_count != q.atom_count:
        raise ValueError("partitions over different atom counts")
    rep: dict[int, int] = {}
    for a in range(q.atom_count):
        qb = q.block_of[a]
        pb = p.block_of[a]
        if qb in rep:
            if rep[qb] != pb:
                return False
        else:
            rep[qb] = pb
    return True


def join(p: Partition, q: Partition) -> Partition:
    """Least upper bound: the common refinement."""
    if p.atom_count != q.atom_count:
        raise ValueError("partitions over different atom counts")
    seen: dict[tuple, int] = {}
    out = []
    for pb, qb in zip(p.block_of, q.block_of):
        key = (pb, qb)
        if key not in seen:
            seen[key] = len(seen)
        out.append(seen[key])
    return Partition(tuple(out))


def meet(p: Partition, q: Partition) -> Partition:
    """Greatest lower bound: the finest partition coarser than both."""
    if p.atom_count != q.atom_count:
        raise ValueError("partitions over different atom counts")
    n = p.atom_count
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    for part in (p, q):
        first: dict[int, int] = {}
        for a, b in enumerate(part.block_of):
            if b in first:
                union(first[b], a)
            else:
                first[b] = a
    return Partition.of([find(a) for a in range(n)])


def _value_key(v: Scalar, mode: Mode):
    # Float-mode grouping is bitwise so that equal-looking but distinct
    # payloads never merge silently; exact mode groups by rational value.
    if mode == "float":
        return struct.pack("<d", v)
    return v


def generated_partition(f: RandomVariable) -> Partition:
    """Partition into the level sets of f."""
    seen: dict = {}
    out = []
    for v in f.values:
        key = _value_key(v, f.mode)
        if key not in seen:
            seen[key] = len(seen)
        out.append(seen[key])
    return Partition(tuple(out))


def is_measurable_wrt(f: RandomVariable, p: Partition) -> bool:
    """True iff f is constant on every block of P (same equality as grouping)."""
    if len(f) != p.atom_count:
        raise ValueError("value count does not match partition atom count")
    rep: dict[int, object] = {}
    for a, b in enumerate(p.block_of):
        key = _value_key(f.values[a], f.mode)
        if b in rep:
            if rep[b] != key:
                return False
        else:
            rep[b] = key
    return True


def set_measurable_wrt(s: AtomSet, p: Partition) -> bool:
    """True iff s is a union of blocks of P."""
    for block in p.blocks():
        inside = sum(1 for a in block if a in s)
        if inside not in (0, len(block)):
            return False
    return True
