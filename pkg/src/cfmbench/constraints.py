"""Data constraints of the high-level control fault model.

For each function i and bit k the model asks for operands that make

* TYPE1: bit k of y_i take the active value (1 for active-high control),
* TYPE2: bit k of y_i inactive while bit k of y_j is active, for every j != i.

TYPE2 constraints are the countable fault universe.  HD1 mode keeps only
TYPE2 pairs whose control codes differ in a single bit, which suffices for
single stuck-at faults on the literals.

DISTINCT constraints are an optional word-level extra: some pattern applied
with code(f_i) must give y_i != y_j.  TYPE1/TYPE2 alone do not cover a
stuck control stem that swaps code(f_i) for code(f_j) when y_j is bitwise
contained in y_i (OR vs AND, say); DISTINCT closes that gap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .isa import InstructionSet, Polarity

__all__ = [
    "Kind", "ConstraintMode", "Constraint", "ConstraintSet", "ModelMetrics",
    "enumerate_constraints", "check_constraint", "model_size_metrics",
    "hamming", "activate",
]

U64_MAX = (1 << 64) - 1


class Kind(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2
    DISTINCT = 3


class ConstraintMode(enum.Enum):
    FULL = "full"
    HD1 = "hd1"


@dataclass(frozen=True, order=True)
class Constraint:
    """One data constraint.  ``i``/``j`` are 0-based function indices."""
    kind: Kind
    i: int
    j: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind is Kind.TYPE1:
            if self.j is not None or self.k is None:
                raise ValueError("TYPE1 constraint takes i and k only")
        elif self.kind is Kind.TYPE2:
            if self.j is None or self.k is None or self.j == self.i:
                raise ValueError("TYPE2 constraint needs j != i and a bit k")
        elif self.j is None or self.j == self.i or self.k is not None:
            raise ValueError("DISTINCT constraint needs j != i and no bit")

    def order_key(self) -> tuple[int, int, int, int]:
        """i-major ordering, matching :func:`enumerate_constraints`."""
        return (self.i, self.kind, -1 if self.j is None else self.j,
                -1 if self.k is None else self.k)

    def describe(self, iset: InstructionSet) -> str:
        mn = iset.mnemonics
        if self.kind is Kind.TYPE1:
            return f"{mn[self.i]} active bit {self.k}"
        if self.kind is Kind.TYPE2:
            return f"{mn[self.i]} < {mn[self.j]} bit {self.k}"
        return f"{mn[self.i]} != {mn[self.j]}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[Constraint, ...]
    mode: ConstraintMode
    polarity: Polarity

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def of_kind(self, *kinds: Kind) -> list[Constraint]:
        return [c for c in self.constraints if c.kind in kinds]

    def restricted(self, *kinds: Kind) -> "ConstraintSet":
        return ConstraintSet(tuple(self.of_kind(*kinds)), self.mode, self.polarity)

    def for_function(self, i: int) -> list[Constraint]:
        return [c for c in self.constraints if c.i == i]


def hamming(x: int, y: int) -> int:
    return bin(x ^ y).count("1")


def enumerate_constraints(iset: InstructionSet, mode: ConstraintMode = ConstraintMode.FULL,
                          distinct: bool = False) -> ConstraintSet:
    """All constraints for ``iset``, ordered by i, then j, then k."""
    out: list[Constraint] = []
    codes = [f.code for f in iset.functions]
    for i in range(iset.n):
        out.extend(Constraint(Kind.TYPE1, i, k=k) for k in range(iset.m))
        partners = [j for j in range(iset.n) if j != i and
                    (mode is ConstraintMode.FULL or hamming(codes[i], codes[j]) == 1)]
        for j in partners:
            out.extend(Constraint(Kind.TYPE2, i, j, k) for k in range(iset.m))
        if distinct:
            out.extend(Constraint(Kind.DISTINCT, i, j) for j in partners)
    return ConstraintSet(tuple(out), mode, iset.polarity)


def activate(y: int, m: int, polarity: Polarity) -> int:
    """Map a result so that its active bits read as 1."""
    return y if polarity is Polarity.ACTIVE_HIGH else y ^ ((1 << m) - 1)


def check_constraint(c: Constraint, ys: Sequence[int], m: int,
                     polarity: Polarity = Polarity.ACTIVE_HIGH) -> bool:
    """Does one operand pair, whose results on all functions are ``ys``, satisfy ``c``?"""
    if c.kind is Kind.DISTINCT:
        return ys[c.i] != ys[c.j]
    yi = activate(ys[c.i], m, polarity) >> c.k & 1
    if c.kind is Kind.TYPE1:
        return yi == 1
    yj = activate(ys[c.j], m, polarity) >> c.k & 1
    return yi == 0 and yj == 1


@dataclass(frozen=True)
class ModelMetrics:
    n: int
    m: int
    p: int
    c_saf: int
    c_cfm: int
    c_cfm_hd1: int
    type2_count: int      # countable TYPE2 universe n(n-1)m, no p factor
    tc_saf_estimate: float
    tc_cfm_estimate: float
    tc_cfm_hd1_estimate: float


def model_size_metrics(n: int, m: int, p: int, t_saf: float = 1.0,
                       t_cfm: float = 1.0) -> ModelMetrics:
    """Stuck-at and control-fault-model sizes, with per-fault time estimates."""
    if min(n, m, p) < 1:
        raise ValueError("n, m and p must all be >= 1")
    c_saf = 2 * n * m * p
    c_cfm = n * (n - 1) * m * p
    c_hd1 = n * m * p
    if max(c_saf, c_cfm, c_hd1) > U64_MAX:
        raise OverflowError(f"model size for n={n}, m={m}, p={p} exceeds 64-bit counters")
    return ModelMetrics(n, m, p, c_saf, c_cfm, c_hd1, n * (n - 1) * m,
                        c_saf * t_saf, c_cfm * t_cfm, c_hd1 * t_cfm)
