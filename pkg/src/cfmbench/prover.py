"""Deciding whether high-level constraints can be satisfied at all.

An unsatisfiable TYPE2 constraint marks a redundant control fault.  The
prover tries, in order:

* IDENTICAL -- both functions compute the same operation, so no operand
  pair can tell them apart;
* PARTIAL_TT -- when bit k of both results depends only on operand bits
  0..k (bit-local and low-cone operations), every pair of low operand
  slices is enumerated; bit-local pairs need just the four values of
  (a_k, b_k);
* EXHAUSTIVE -- every operand pair, when the space has at most ``cap`` pairs;
* CORNER_CASE -- the corner deck and then ``budget`` random pairs.  This step
  can only find witnesses; exhausting it yields UNKNOWN, never REDUNDANT.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constraints import Constraint, Kind
from .isa import BitCone, InstructionSet, Mode, Polarity
from .operands import corner_case_deck, exhaustive_pool, random_operands, space_bits

__all__ = ["Status", "Method", "Verdict", "Prover", "prove_hl_redundancy",
           "corner_case_deck", "format_redundancy_report", "parse_redundancy_report",
           "DEFAULT_PROVER_CAP", "DEFAULT_PROVER_BUDGET"]

DEFAULT_PROVER_CAP = 1 << 20
DEFAULT_PROVER_BUDGET = 1 << 16
TT_MAX_BITS = 12


class Status(enum.Enum):
    SATISFIABLE = "SAT"
    REDUNDANT = "REDUNDANT"
    UNKNOWN = "UNKNOWN"


class Method(enum.Enum):
    IDENTICAL = "IDENTICAL"
    PARTIAL_TT = "PARTIAL_TT"
    EXHAUSTIVE = "EXHAUSTIVE"
    CORNER_CASE = "CORNER_CASE"


@dataclass(frozen=True)
class Verdict:
    status: Status
    method: Method
    witness: tuple[int, int] | None = None
    note: str = ""


def _hits(c: Constraint, iset: InstructionSet, y: np.ndarray) -> np.ndarray:
    if c.kind is Kind.DISTINCT:
        return y[c.i] != y[c.j]
    bit = np.uint64(c.k)
    one = np.uint64(1)
    flip = np.uint64(iset.polarity is Polarity.ACTIVE_LOW)
    yi = ((y[c.i] >> bit) & one) ^ flip
    if c.kind is Kind.TYPE1:
        return yi == one
    yj = ((y[c.j] >> bit) & one) ^ flip
    return (yi == 0) & (yj == one)


class Prover:
    def __init__(self, iset: InstructionSet, cap: int = DEFAULT_PROVER_CAP,
                 budget: int = DEFAULT_PROVER_BUDGET, seed: int = 0):
        if cap < 1 or budget < 0:
            raise ValueError("cap must be >= 1 and budget >= 0")
        self.iset = iset
        self.cap = cap
        self.budget = budget
        self.seed = seed
        self._pool = None
        self._search = None

    # candidate pools, built on first use and shared by all constraints
    def _exhaustive(self):
        if self._pool is None:
            a, b = exhaustive_pool(self.iset)
            self._pool = (a, b, self.iset.eval_all(a, b))
        return self._pool

    def _sampled(self):
        if self._search is None:
            deck = np.array(corner_case_deck(self.iset), dtype=np.uint64).reshape(-1, 2)
            ra, rb = random_operands(self.iset, np.random.default_rng([self.seed, 0x5EA]),
                                     self.budget)
            a = np.concatenate([deck[:, 0], ra])
            b = np.concatenate([deck[:, 1], rb])
            self._search = (a, b, self.iset.eval_all(a, b))
        return self._search

    def _tt_values(self, c: Constraint) -> np.ndarray | None:
        """Operand values for PARTIAL_TT on ``c``, or None if it does not apply."""
        if c.kind is Kind.DISTINCT or self.iset.mode is Mode.DIRECT:
            return None
        fs = [self.iset.functions[c.i]] + ([self.iset.functions[c.j]] if c.j is not None else [])
        cones = {f.cone for f in fs}
        if cones == {BitCone.BIT_LOCAL}:
            return np.array([0, 1 << c.k], dtype=np.uint64)
        if cones <= {BitCone.BIT_LOCAL, BitCone.LOW_CONE} and c.k + 1 <= TT_MAX_BITS:
            return np.arange(1 << (c.k + 1), dtype=np.uint64)
        return None

    def _tt_pool(self, c: Constraint):
        vals = self._tt_values(c)
        a = np.repeat(vals, len(vals))
        b = np.tile(vals, len(vals))
        return a, b, self.iset.eval_all(a, b)

    def _identical(self, c: Constraint) -> bool:
        if c.kind is Kind.TYPE1 or self.iset.mode is Mode.DIRECT:
            return False
        return self.iset.functions[c.i].op == self.iset.functions[c.j].op

    def applicable(self, c: Constraint) -> list[Method]:
        out = []
        if self._identical(c):
            out.append(Method.IDENTICAL)
        if self._tt_values(c) is not None:
            out.append(Method.PARTIAL_TT)
        if (1 << space_bits(self.iset)) <= self.cap:
            out.append(Method.EXHAUSTIVE)
        out.append(Method.CORNER_CASE)
        return out

    def prove(self, c: Constraint, method: Method | None = None) -> Verdict:
        """Decide ``c``; ``method`` forces one step of the cascade."""
        methods = self.applicable(c)
        if method is not None:
            if method not in methods:
                raise ValueError(f"{method.value} does not apply to {c.describe(self.iset)}")
            methods = [method]
        m = methods[0]
        if m is Method.IDENTICAL:
            return Verdict(Status.REDUNDANT, m, note="same operation")
        if m is Method.PARTIAL_TT:
            pool, sound = self._tt_pool(c), True
        elif m is Method.EXHAUSTIVE:
            pool, sound = self._exhaustive(), True
        else:
            pool, sound = self._sampled(), False
        a, b, y = pool
        found = np.flatnonzero(_hits(c, self.iset, y))
        if found.size:
            t = int(found[0])
            return Verdict(Status.SATISFIABLE, m, (int(a[t]), int(b[t])))
        if sound:
            return Verdict(Status.REDUNDANT, m, note=f"{len(a)} operand pairs")
        return Verdict(Status.UNKNOWN, m, note=f"no witness in {len(a)} pairs")


def prove_hl_redundancy(iset: InstructionSet, i: int, j: int, k: int,
                        cap: int = DEFAULT_PROVER_CAP, budget: int = DEFAULT_PROVER_BUDGET,
                        seed: int = 0) -> Verdict:
    """Verdict on the TYPE2 constraint "y_i bit k inactive while y_j bit k active"."""
    return Prover(iset, cap, budget, seed).prove(Constraint(Kind.TYPE2, i, j, k))


def format_redundancy_report(verdicts: dict[Constraint, Verdict], iset: InstructionSet) -> str:
    wa, wb = iset.operand_bits
    da, db = max(1, (wa + 3) // 4), max(1, (wb + 3) // 4)
    lines = []
    for c in sorted(verdicts, key=Constraint.order_key):
        v = verdicts[c]
        if v.status is Status.SATISFIABLE:
            tail = f"SAT {v.witness[0]:0{da}x} {v.witness[1]:0{db}x}"
        elif v.status is Status.REDUNDANT:
            tail = f"REDUNDANT {v.method.value}"
        else:
            tail = "UNKNOWN"
        lines.append(f"constraint {c.describe(iset)} : {tail}")
    return "".join(line + "\n" for line in lines)


def parse_redundancy_report(text: str) -> list[tuple[str, str]]:
    """Rows of (constraint description, outcome) from a redundancy report."""
    rows = []
    for line in text.splitlines():
        if line.startswith("constraint "):
            desc, outcome = line[len("constraint "):].rsplit(" : ", 1)
            rows.append((desc, outcome))
    return rows
