"""Simulation-based random search for test data, and test compaction."""

from __future__ import annotations

from collections import Counter

import numpy as np

from .constraints import Constraint, ConstraintSet, Kind
from .hlsim import FaultTable, activated_results, simulate
from .isa import InstructionSet
from .operands import candidate_stream
from .patterns import TestPattern, TestSet

__all__ = ["DEFAULT_BUDGET", "generate", "compact", "pattern_witnesses"]

DEFAULT_BUDGET = 100_000


class _Needs:
    """Bit masks of the still-unsatisfied constraints of one function."""

    def __init__(self, iset: InstructionSet, i: int, constraints: list[Constraint]):
        self.i = i
        self.type1 = 0
        self.type2 = [0] * iset.n
        self.distinct = [False] * iset.n
        for c in constraints:
            if c.kind is Kind.TYPE1:
                self.type1 |= 1 << c.k
            elif c.kind is Kind.TYPE2:
                self.type2[c.j] |= 1 << c.k
            else:
                self.distinct[c.j] = True

    def __bool__(self):
        return bool(self.type1 or any(self.type2) or any(self.distinct))

    def hits(self, y: np.ndarray, act: np.ndarray, full: np.uint64) -> np.ndarray:
        ai = act[self.i]
        hit = (ai & np.uint64(self.type1)) != 0
        inactive = ~ai & full
        for j, bits in enumerate(self.type2):
            if bits:
                hit |= (inactive & act[j] & np.uint64(bits)) != 0
        for j, want in enumerate(self.distinct):
            if want:
                hit |= y[self.i] != y[j]
        return hit

    def consume(self, y: list[int], act: list[int], full: int) -> None:
        ai = act[self.i]
        self.type1 &= ~ai
        for j in range(len(self.type2)):
            self.type2[j] &= ~(~ai & act[j] & full)
            if y[j] != y[self.i]:
                self.distinct[j] = False


def generate(iset: InstructionSet, cs: ConstraintSet, budget: int = DEFAULT_BUDGET,
             seed: int = 0, chunk: int = 4096) -> tuple[TestSet, FaultTable, list[Constraint]]:
    """Greedy random search for operands satisfying ``cs``.

    For each function the corner deck is tried first, then uniform samples,
    at most ``budget`` candidates in all.  A candidate is kept only if it
    satisfies a constraint of that function not satisfied so far.  Returns the
    test, its fault table and the constraints left unsatisfied.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    full = np.uint64(iset.full)
    kept: list[TestPattern] = []
    for i in range(iset.n):
        needs = _Needs(iset, i, cs.for_function(i))
        if not needs:
            continue
        rng = np.random.default_rng([seed, i])
        for a, b in candidate_stream(iset, rng, budget, chunk):
            y = iset.eval_all(a, b)
            act = activated_results(iset, y)
            start = 0
            while needs and start < len(a):
                found = np.flatnonzero(needs.hits(y[:, start:], act[:, start:], full))
                if not len(found):
                    break
                t = start + int(found[0])
                kept.append(TestPattern(i, int(a[t]), int(b[t])))
                needs.consume([int(v) for v in y[:, t]], [int(v) for v in act[:, t]], iset.full)
                start = t + 1
            if not needs:
                break
    ts = TestSet(tuple(kept), seed, iset.digest())
    ft = simulate(iset, ts)
    return ts, ft, ft.unsatisfied(cs)


def pattern_witnesses(ts: TestSet, cs: ConstraintSet, iset: InstructionSet) -> list[set[Constraint]]:
    """For each pattern, the constraints of ``cs`` it satisfies on its own."""
    by_func: dict[int, list[Constraint]] = {}
    for c in cs:
        by_func.setdefault(c.i, []).append(c)
    out = []
    for p in ts.patterns:
        single = simulate(iset, ts.with_patterns([p]))
        out.append({c for c in by_func.get(p.func, ()) if single.satisfied(c)})
    return out


def compact(ts: TestSet, cs: ConstraintSet, iset: InstructionSet) -> TestSet:
    """Drop patterns, last first, whose removal loses no satisfied constraint."""
    wit = pattern_witnesses(ts, cs, iset)
    count = Counter(c for w in wit for c in w)
    keep = [True] * len(ts.patterns)
    for idx in reversed(range(len(ts.patterns))):
        if all(count[c] > 1 for c in wit[idx]):
            keep[idx] = False
            count.subtract(wit[idx])
    return ts.with_patterns(p for p, k in zip(ts.patterns, keep) if k)
