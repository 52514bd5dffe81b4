"""High-level fault simulation: the fault table D and constraint coverage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .constraints import Constraint, ConstraintSet, Kind
from .isa import InstructionSet, Polarity
from .patterns import TestSet

__all__ = ["FaultTable", "CoverageReport", "CoverageError", "simulate", "coverage",
           "format_fault_table", "parse_fault_table", "render_fault_table",
           "activated_results"]


class CoverageError(ValueError):
    pass


@dataclass
class FaultTable:
    """Bit vectors of satisfied constraints.

    ``entries[i][j]`` bit k is set when some pattern of function i made bit k of
    y_i inactive and bit k of y_j active.  ``type1[i]`` collects the bits of
    y_i seen active, ``distinct[i][j]`` whether some pattern of i separated
    y_i from y_j.  The diagonal stays empty.
    """
    n: int
    m: int
    entries: list[list[int]] | None = None
    type1: list[int] | None = None
    distinct: list[list[bool]] | None = None

    def __post_init__(self):
        if self.entries is None:
            self.entries = [[0] * self.n for _ in range(self.n)]
        if self.type1 is None:
            self.type1 = [0] * self.n
        if self.distinct is None:
            self.distinct = [[False] * self.n for _ in range(self.n)]

    def satisfied(self, c: Constraint) -> bool:
        if c.kind is Kind.TYPE1:
            return bool(self.type1[c.i] >> c.k & 1)
        if c.kind is Kind.TYPE2:
            return bool(self.entries[c.i][c.j] >> c.k & 1)
        return self.distinct[c.i][c.j]

    def unsatisfied(self, constraints: Iterable[Constraint]) -> list[Constraint]:
        return [c for c in constraints if not self.satisfied(c)]

    def __or__(self, other: "FaultTable") -> "FaultTable":
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError("fault tables have different shapes")
        n = self.n
        return FaultTable(
            n, self.m,
            [[self.entries[i][j] | other.entries[i][j] for j in range(n)] for i in range(n)],
            [x | y for x, y in zip(self.type1, other.type1)],
            [[self.distinct[i][j] or other.distinct[i][j] for j in range(n)] for i in range(n)])


def activated_results(iset: InstructionSet, y: np.ndarray) -> np.ndarray:
    """Flip results of an active-low set so that active bits read as 1."""
    if iset.polarity is Polarity.ACTIVE_LOW:
        return y ^ np.uint64(iset.full)
    return y


def simulate(iset: InstructionSet, ts: TestSet) -> FaultTable:
    """Fault-simulate a whole test: evaluate every function on each pattern's operands."""
    n, m = iset.n, iset.m
    ts.check(iset)
    ft = FaultTable(n, m)
    if not ts.patterns:
        return ft
    funcs = np.array([p.func for p in ts.patterns])
    a = np.array([p.a for p in ts.patterns], dtype=np.uint64)
    b = np.array([p.b for p in ts.patterns], dtype=np.uint64)
    y = iset.eval_all(a, b)
    act = activated_results(iset, y)
    full = np.uint64(iset.full)
    for i in range(n):
        sel = funcs == i
        if not sel.any():
            continue
        yi = act[i, sel]
        ft.type1[i] = int(np.bitwise_or.reduce(yi))
        inactive = ~yi & full
        for j in range(n):
            if j == i:
                continue
            ft.entries[i][j] = int(np.bitwise_or.reduce(inactive & act[j, sel]))
            ft.distinct[i][j] = bool(np.any(y[i, sel] != y[j, sel]))
    return ft


@dataclass(frozen=True)
class CoverageReport:
    satisfied: int
    total: int
    redundant_excluded: int
    raw_pct: float
    adjusted_pct: float

    @property
    def complete(self) -> bool:
        return self.satisfied == self.total - self.redundant_excluded


def _pct(num: int, den: int) -> float:
    return 100.0 if den == 0 else 100.0 * num / den


def coverage(ft: FaultTable, redundant: Iterable[Constraint] = (),
             cs: ConstraintSet | None = None, include_type1: bool = False) -> CoverageReport:
    """Percentage of satisfied TYPE2 constraints, raw and net of proven redundancies.

    ``cs`` narrows the universe (e.g. to an HD1 set); ``include_type1`` adds
    the TYPE1 constraints to the count.
    """
    kinds = {Kind.TYPE2, Kind.TYPE1} if include_type1 else {Kind.TYPE2}
    if cs is not None:
        universe = [c for c in cs if c.kind in kinds]
    else:
        universe = []
        for i in range(ft.n):
            if include_type1:
                universe += [Constraint(Kind.TYPE1, i, k=k) for k in range(ft.m)]
            universe += [Constraint(Kind.TYPE2, i, j, k)
                         for j in range(ft.n) if j != i for k in range(ft.m)]
    members = set(universe)
    red = {c for c in redundant if c in members}
    clash = sorted(c for c in red if ft.satisfied(c))
    if clash:
        raise CoverageError(f"{len(clash)} constraint(s) marked redundant but satisfied, "
                            f"first: {clash[0]}")
    sat = sum(1 for c in universe if ft.satisfied(c))
    total = len(universe)
    return CoverageReport(sat, total, len(red), _pct(sat, total), _pct(sat, total - len(red)))


def _bits(value: int, m: int) -> str:
    return format(value, f"0{m}b")


def format_fault_table(ft: FaultTable, iset: InstructionSet) -> str:
    mn = iset.mnemonics
    lines = [f"faulttable n={ft.n} m={ft.m}"]
    for i in range(ft.n):
        for j in range(ft.n):
            if i != j:
                lines.append(f"{mn[i]} {mn[j]} {_bits(ft.entries[i][j], ft.m)}")
    for i in range(ft.n):
        lines.append(f"active {mn[i]} {_bits(ft.type1[i], ft.m)}")
    for i in range(ft.n):
        for j in range(ft.n):
            if i != j:
                lines.append(f"distinct {mn[i]} {mn[j]} {int(ft.distinct[i][j])}")
    return "\n".join(lines) + "\n"


def parse_fault_table(text: str) -> tuple[list[str], FaultTable]:
    """Inverse of :func:`format_fault_table`; returns (mnemonics, table)."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0] != "faulttable":
        raise ValueError("missing 'faulttable n=<n> m=<m>' header")
    head = dict(w.split("=") for w in lines[0][1:])
    n, m = int(head["n"]), int(head["m"])
    names: list[str] = []
    for words in lines[1:]:
        name = words[1] if words[0] in ("active", "distinct") else words[0]
        if name not in names:
            names.append(name)
    if len(names) != n:
        raise ValueError(f"header says n={n} but {len(names)} mnemonics found")
    pos = {name: idx for idx, name in enumerate(names)}
    ft = FaultTable(n, m)
    for words in lines[1:]:
        if words[0] == "active":
            ft.type1[pos[words[1]]] = int(words[2], 2)
        elif words[0] == "distinct":
            ft.distinct[pos[words[1]]][pos[words[2]]] = words[3] == "1"
        else:
            ft.entries[pos[words[0]]][pos[words[1]]] = int(words[2], 2)
    return names, ft


def render_fault_table(ft: FaultTable, names: list[str]) -> str:
    """Matrix view: row i, column j shows D_ij from bit m-1 down to bit 0."""
    width = max([ft.m] + [len(s) for s in names]) + 2
    head = " " * width + "".join(f"{s:<{width}}" for s in names)
    rows = [head.rstrip()]
    for i, name in enumerate(names):
        cells = ["-" if i == j else _bits(ft.entries[i][j], ft.m) for j in range(ft.n)]
        rows.append((f"{name:<{width}}" + "".join(f"{c:<{width}}" for c in cells)).rstrip())
    return "\n".join(rows) + "\n"
