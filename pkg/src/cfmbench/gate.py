"""Gate-level view of the ALU control part: the DNF multiplexer and its faults.

The multiplexer output is ``y = OR_i (t_i AND y_i)`` where term ``t_i`` is the
AND of p literals, literal j being control stem c_j or its inversion as
dictated by code(f_i).  Each term drives m AND gates, one per data lane.
Active-low sets use the dual structure ``y = AND_i (NOT t_i OR y_i)``.

Fault sites:

* stem ``c_j`` -- the global control line, before any inversion;
* branch ``(i, j)`` -- literal j of term i, after inversion (AND-block input);
* lane ``(i, j, k)`` -- that literal at the AND gate of data lane k.

Simulation is bit-parallel: every term evaluates to an m-bit lane mask.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .constraints import Constraint, Kind
from .isa import InstructionSet, Polarity
from .operands import corner_case_deck, exhaustive_pool, random_operands, space_bits
from .patterns import TestPattern, TestSet
from .prover import Prover, Status, Verdict

__all__ = [
    "Scope", "Site", "FaultKind", "BridgeModel", "GateFault", "GateControlModel",
    "synthesize", "enumerate_faults", "FaultResult", "DetectionReport",
    "fault_simulate", "detection_matrix", "OracleStatus", "OracleVerdict",
    "GateOracle", "redundancy_oracle", "format_detection_report",
    "parse_detection_report", "DEFAULT_ORACLE_CAP", "DEFAULT_MULTI_CAP",
]

DEFAULT_ORACLE_CAP = 1 << 20
DEFAULT_ORACLE_BUDGET = 1 << 16
DEFAULT_MULTI_CAP = 200_000


class Scope(enum.IntEnum):
    STEM = 0
    BRANCH = 1
    LANE = 2


@dataclass(frozen=True, order=True)
class Site:
    scope: Scope
    line: int            # control line j, 0-based
    term: int = -1       # term i, 0-based; -1 for stems
    bit: int = -1        # data lane k; -1 unless scope is LANE

    @property
    def descriptor(self) -> str:
        if self.scope is Scope.STEM:
            return f"stem c{self.line + 1}"
        if self.scope is Scope.BRANCH:
            return f"branch t{self.term + 1}.c{self.line + 1}"
        return f"lane t{self.term + 1}.c{self.line + 1}.b{self.bit}"


class FaultKind(enum.Enum):
    SAF = "SAF"
    MULTI_SAF = "MULTI_SAF"
    BRIDGE = "BRIDGE"


class BridgeModel(enum.Enum):
    WIRED_AND = "wired_and"
    WIRED_OR = "wired_or"


@dataclass(frozen=True)
class GateFault:
    kind: FaultKind
    sites: tuple[Site, ...]
    values: tuple[int, ...] = ()           # stuck values, one per site (SAF kinds)
    bridge: BridgeModel | None = None

    def __post_init__(self):
        if self.kind is FaultKind.BRIDGE:
            if len(self.sites) != 2 or self.sites[0] == self.sites[1] or self.bridge is None:
                raise ValueError("a bridge joins two distinct lines")
            if self.sites[0].scope != self.sites[1].scope or self.sites[0].term != self.sites[1].term:
                raise ValueError("bridges join two stems or two branches of one term")
        else:
            if len(self.values) != len(self.sites) or any(v not in (0, 1) for v in self.values):
                raise ValueError("one stuck value (0/1) per site")
            if len(set(self.sites)) != len(self.sites):
                raise ValueError("fault sites must be distinct")
            want = FaultKind.SAF if len(self.sites) == 1 else FaultKind.MULTI_SAF
            if self.kind is not want:
                raise ValueError(f"{len(self.sites)} site(s) make a {want.value} fault")

    @classmethod
    def saf(cls, site: Site, value: int) -> "GateFault":
        return cls(FaultKind.SAF, (site,), (value,))

    @classmethod
    def multi(cls, stuck: Iterable[tuple[Site, int]]) -> "GateFault":
        stuck = sorted(stuck)
        return cls(FaultKind.MULTI_SAF, tuple(s for s, _ in stuck), tuple(v for _, v in stuck))

    @classmethod
    def bridging(cls, a: Site, b: Site, model: BridgeModel) -> "GateFault":
        a, b = sorted((a, b))
        return cls(FaultKind.BRIDGE, (a, b), (), model)

    @property
    def descriptor(self) -> str:
        if self.kind is FaultKind.BRIDGE:
            return f"{self.sites[0].descriptor} , {self.sites[1].descriptor} {self.bridge.value}"
        return " + ".join(f"{s.descriptor} sa{v}" for s, v in zip(self.sites, self.values))


def _wire(model: BridgeModel, x: int, y: int) -> int:
    return x & y if model is BridgeModel.WIRED_AND else x | y


@dataclass(frozen=True)
class GateControlModel:
    n: int
    m: int
    p: int
    codes: tuple[int, ...]
    polarity: Polarity = Polarity.ACTIVE_HIGH

    @property
    def legal(self) -> frozenset[int]:
        return frozenset(self.codes)

    @property
    def literal_polarity(self) -> tuple[tuple[bool, ...], ...]:
        """Entry (i, j) is True when term i uses c_j uninverted."""
        return tuple(tuple(bool(c >> j & 1) for j in range(self.p)) for c in self.codes)

    @property
    def full(self) -> int:
        return (1 << self.m) - 1

    def check_fault(self, fault: GateFault) -> None:
        for s in fault.sites:
            bad = (not 0 <= s.line < self.p
                   or (s.scope is not Scope.STEM and not 0 <= s.term < self.n)
                   or (s.scope is Scope.LANE and not 0 <= s.bit < self.m))
            if bad:
                raise ValueError(f"fault site {s.descriptor} outside the "
                                 f"n={self.n}, p={self.p}, m={self.m} model")

    def literal_values(self, code: int, fault: GateFault | None = None) -> list[int]:
        """Per term, a p-bit vector whose bit j is the value of literal j."""
        pmask = (1 << self.p) - 1
        stems = code
        if fault is not None and fault.kind is FaultKind.BRIDGE:
            s1, s2 = fault.sites
            if s1.scope is Scope.STEM:
                v = _wire(fault.bridge, stems >> s1.line & 1, stems >> s2.line & 1)
                stems = stems & ~(1 << s1.line) & ~(1 << s2.line)
                stems |= (v << s1.line) | (v << s2.line)
        elif fault is not None:
            for s, v in zip(fault.sites, fault.values):
                if s.scope is Scope.STEM:
                    stems = (stems & ~(1 << s.line)) | (v << s.line)
        lits = [~(stems ^ c) & pmask for c in self.codes]
        if fault is None:
            return lits
        if fault.kind is FaultKind.BRIDGE:
            s1, s2 = fault.sites
            if s1.scope is Scope.BRANCH:
                t = lits[s1.term]
                v = _wire(fault.bridge, t >> s1.line & 1, t >> s2.line & 1)
                t = t & ~(1 << s1.line) & ~(1 << s2.line)
                lits[s1.term] = t | (v << s1.line) | (v << s2.line)
        else:
            for s, v in zip(fault.sites, fault.values):
                if s.scope is Scope.BRANCH:
                    lits[s.term] = (lits[s.term] & ~(1 << s.line)) | (v << s.line)
        return lits

    def term_masks(self, code: int, fault: GateFault | None = None) -> list[int]:
        """Per term, the m-bit mask of lanes whose AND gate is enabled."""
        pmask = (1 << self.p) - 1
        lits = self.literal_values(code, fault)
        masks = [self.full if t == pmask else 0 for t in lits]
        if fault is None or fault.kind is FaultKind.BRIDGE:
            return masks
        lanes: dict[tuple[int, int], int] = {}
        for s, v in zip(fault.sites, fault.values):
            if s.scope is Scope.LANE:
                key = (s.term, s.bit)
                t = lanes.get(key, lits[s.term])
                lanes[key] = (t & ~(1 << s.line)) | (v << s.line)
        for (i, k), t in lanes.items():
            masks[i] = (masks[i] & ~(1 << k)) | (int(t == pmask) << k)
        return masks

    def output(self, masks: Sequence[int], ys: Sequence[int]) -> int:
        if self.polarity is Polarity.ACTIVE_HIGH:
            out = 0
            for mask, y in zip(masks, ys):
                out |= mask & y
            return out
        out = self.full
        for mask, y in zip(masks, ys):
            out &= (~mask | y) & self.full
        return out

    def output_array(self, masks: Sequence[int], y: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`output` over columns of ``y`` (shape (n, N))."""
        if self.polarity is Polarity.ACTIVE_HIGH:
            out = np.zeros(y.shape[1], dtype=np.uint64)
            for i, mask in enumerate(masks):
                if mask:
                    out |= y[i] & np.uint64(mask)
            return out
        full = np.uint64(self.full)
        out = np.full(y.shape[1], full, dtype=np.uint64)
        for i, mask in enumerate(masks):
            if mask:
                out &= (~np.uint64(mask) & full) | y[i]
        return out


def synthesize(iset: InstructionSet) -> GateControlModel:
    return GateControlModel(iset.n, iset.m, iset.p, tuple(f.code for f in iset.functions),
                            iset.polarity)


def _sites(model: GateControlModel, lanes: bool) -> list[Site]:
    out = [Site(Scope.STEM, j) for j in range(model.p)]
    out += [Site(Scope.BRANCH, j, i) for i in range(model.n) for j in range(model.p)]
    if lanes:
        out += [Site(Scope.LANE, j, i, k) for i in range(model.n)
                for j in range(model.p) for k in range(model.m)]
    return out


def enumerate_faults(model: GateControlModel, single: bool = True, multi: int = 0,
                     bridges: bool = False, lanes: bool = False,
                     multi_cap: int = DEFAULT_MULTI_CAP, sample: bool = False,
                     seed: int = 0) -> list[GateFault]:
    """Fault universe on the control lines.

    ``multi`` is the largest multiple-fault size (0 disables, else >= 2).
    Multiple faults are listed exhaustively unless there are more than
    ``multi_cap`` of them, in which case ``sample`` must be set and
    ``multi_cap`` distinct ones are drawn at random.
    """
    if multi and multi < 2:
        raise ValueError("multiple faults need size >= 2")
    sites = _sites(model, lanes)
    faults: list[GateFault] = []
    if single:
        faults += [GateFault.saf(s, v) for s in sites for v in (0, 1)]
    if bridges:
        groups = [[s for s in sites if s.scope is Scope.STEM]]
        groups += [[s for s in sites if s.scope is Scope.BRANCH and s.term == i]
                   for i in range(model.n)]
        for group in groups:
            for a, b in itertools.combinations(group, 2):
                faults += [GateFault.bridging(a, b, bm) for bm in BridgeModel]
    if multi:
        L = len(sites)
        count = sum(math.comb(L, size) << size for size in range(2, multi + 1))
        if count <= multi_cap:
            for size in range(2, multi + 1):
                for combo in itertools.combinations(sites, size):
                    for vals in itertools.product((0, 1), repeat=size):
                        faults.append(GateFault.multi(zip(combo, vals)))
        elif not sample:
            raise ValueError(f"{count} multiple faults exceed the cap of {multi_cap}; "
                             f"enable sampling or raise the cap")
        else:
            rng = random.Random(seed)
            picked: set[GateFault] = set()
            while len(picked) < multi_cap:
                size = rng.randint(2, multi)
                combo = rng.sample(sites, size)
                picked.add(GateFault.multi((s, rng.randint(0, 1)) for s in combo))
            faults += sorted(picked, key=lambda f: (f.sites, f.values))
    return faults


@dataclass(frozen=True)
class FaultResult:
    fault: GateFault
    first: int | None        # index of the first detecting pattern

    @property
    def detected(self) -> bool:
        return self.first is not None


@dataclass(frozen=True)
class DetectionReport:
    results: tuple[FaultResult, ...]

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def detected(self) -> int:
        return sum(r.detected for r in self.results)

    @property
    def coverage_pct(self) -> float:
        return 100.0 if not self.results else 100.0 * self.detected / self.total

    def undetected(self) -> list[GateFault]:
        return [r.fault for r in self.results if not r.detected]


def _test_arrays(iset: InstructionSet, ts: TestSet):
    ts.check(iset)
    funcs = np.array([p.func for p in ts.patterns], dtype=np.int64)
    a = np.array([p.a for p in ts.patterns], dtype=np.uint64)
    b = np.array([p.b for p in ts.patterns], dtype=np.uint64)
    return funcs, iset.eval_all(a, b)


def fault_simulate(model: GateControlModel, iset: InstructionSet, ts: TestSet,
                   faults: Sequence[GateFault]) -> DetectionReport:
    """First detecting pattern of every fault, or None."""
    for f in faults:
        model.check_fault(f)
    funcs, y = _test_arrays(iset, ts)
    groups = [(h, np.flatnonzero(funcs == h)) for h in range(model.n)]
    groups = [(h, idx) for h, idx in groups if idx.size]
    good = {h: model.term_masks(model.codes[h]) for h, _ in groups}
    results = []
    for fault in faults:
        first = None
        for h, idx in groups:
            masks = model.term_masks(model.codes[h], fault)
            if masks == good[h]:
                continue
            yy = y[:, idx]
            diff = np.flatnonzero(model.output_array(masks, yy) != yy[h])
            if diff.size:
                cand = int(idx[diff[0]])
                first = cand if first is None else min(first, cand)
        results.append(FaultResult(fault, first))
    return DetectionReport(tuple(results))


def detection_matrix(model: GateControlModel, iset: InstructionSet, ts: TestSet,
                     faults: Sequence[GateFault]) -> np.ndarray:
    """Boolean matrix, faults x patterns: does the pattern detect the fault."""
    funcs, y = _test_arrays(iset, ts)
    out = np.zeros((len(faults), len(ts.patterns)), dtype=bool)
    for h in range(model.n):
        idx = np.flatnonzero(funcs == h)
        if not idx.size:
            continue
        yy = y[:, idx]
        for row, fault in enumerate(faults):
            masks = model.term_masks(model.codes[h], fault)
            out[row, idx] = model.output_array(masks, yy) != yy[h]
    return out


class OracleStatus(enum.Enum):
    TESTABLE = "TESTABLE"
    REDUNDANT = "REDUNDANT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class OracleVerdict:
    status: OracleStatus
    witness: TestPattern | None = None


class GateOracle:
    """Decides whether some legal stimulus detects a fault.

    Control values depend only on the code, so for each legal code the faulty
    lane masks are computed first; codes where they match the fault-free ones
    can never detect.  Remaining codes are searched over operand pairs,
    exhaustively when the operand space has at most ``cap`` pairs, otherwise
    over the corner deck plus ``budget`` random pairs.

    When sampling finds nothing, each affected (code h, lane k) is reduced to
    constraint satisfiability: with term set S enabled on lane k, the lane
    differs iff some TYPE2 (h, i, k), i in S, holds (h in S), TYPE1 (h, k)
    holds (S empty), or y_i and y_h differ in bit k (S = {i}).  These go to
    the prover, so REDUNDANT still rests on exhaustive evidence only.
    """

    def __init__(self, model: GateControlModel, iset: InstructionSet,
                 cap: int = DEFAULT_ORACLE_CAP, budget: int = DEFAULT_ORACLE_BUDGET,
                 seed: int = 0):
        self.model = model
        self.iset = iset
        self.exhaustive = (1 << space_bits(iset)) <= cap
        if self.exhaustive:
            a, b = exhaustive_pool(iset)
        else:
            deck = np.array(corner_case_deck(iset), dtype=np.uint64).reshape(-1, 2)
            ra, rb = random_operands(iset, np.random.default_rng([seed, 0x0AC1E]), budget)
            a = np.concatenate([deck[:, 0], ra])
            b = np.concatenate([deck[:, 1], rb])
        self.a, self.b = a, b
        self.y = iset.eval_all(a, b)
        self._good = {c: model.term_masks(c) for c in model.codes}
        self._prover = Prover(iset, cap, budget, seed)
        self._proofs: dict[Constraint, Verdict] = {}

    def _prove(self, c: Constraint) -> Verdict:
        if c not in self._proofs:
            self._proofs[c] = self._prover.prove(c)
        return self._proofs[c]

    def _reduce(self, affected: list[tuple[int, list[int]]]) -> OracleVerdict:
        decided = True
        for h, masks in affected:
            for k in range(self.model.m):
                lanes = [i for i, mask in enumerate(masks) if mask >> k & 1]
                if lanes == [h]:
                    continue
                if h in lanes:
                    asks = [Constraint(Kind.TYPE2, h, i, k) for i in lanes if i != h]
                elif not lanes:
                    asks = [Constraint(Kind.TYPE1, h, k=k)]
                elif len(lanes) == 1:
                    asks = [Constraint(Kind.TYPE2, h, lanes[0], k),
                            Constraint(Kind.TYPE2, lanes[0], h, k)]
                else:
                    decided = False
                    continue
                for c in asks:
                    v = self._prove(c)
                    if v.status is Status.SATISFIABLE:
                        return OracleVerdict(OracleStatus.TESTABLE, TestPattern(h, *v.witness))
                    if v.status is Status.UNKNOWN:
                        decided = False
        return OracleVerdict(OracleStatus.REDUNDANT if decided else OracleStatus.UNKNOWN)

    def classify(self, fault: GateFault) -> OracleVerdict:
        self.model.check_fault(fault)
        affected = []
        for h, code in enumerate(self.model.codes):
            masks = self.model.term_masks(code, fault)
            if masks == self._good[code]:
                continue
            affected.append((h, masks))
            diff = np.flatnonzero(self.model.output_array(masks, self.y) != self.y[h])
            if diff.size:
                t = int(diff[0])
                return OracleVerdict(OracleStatus.TESTABLE,
                                     TestPattern(h, int(self.a[t]), int(self.b[t])))
        if not affected or self.exhaustive:
            return OracleVerdict(OracleStatus.REDUNDANT)
        return self._reduce(affected)


def redundancy_oracle(model: GateControlModel, iset: InstructionSet, fault: GateFault,
                      cap: int = DEFAULT_ORACLE_CAP, budget: int = DEFAULT_ORACLE_BUDGET,
                      seed: int = 0) -> OracleVerdict:
    return GateOracle(model, iset, cap, budget, seed).classify(fault)


def format_detection_report(report: DetectionReport,
                            verdicts: dict[GateFault, OracleVerdict] | None = None) -> str:
    lines = []
    for r in report.results:
        if r.detected:
            status = f"detected pattern={r.first}"
        else:
            status = "undetected"
            if verdicts and r.fault in verdicts:
                status += f" oracle={verdicts[r.fault].status.value}"
        lines.append(f"fault {r.fault.kind.value} {r.fault.descriptor} : {status}")
    lines.append(f"coverage {report.detected}/{report.total} = {report.coverage_pct:.2f}")
    return "\n".join(lines) + "\n"


def parse_detection_report(text: str) -> list[tuple[str, str, int | None, str | None]]:
    """Rows of (kind, descriptor, first pattern or None, oracle status or None)."""
    rows = []
    for line in text.splitlines():
        if not line.startswith("fault "):
            continue
        head, status = line[len("fault "):].rsplit(" : ", 1)
        kind, desc = head.split(" ", 1)
        first = oracle = None
        words = status.split()
        if words[0] == "detected":
            first = int(words[1].split("=")[1])
        elif len(words) > 1:
            oracle = words[1].split("=")[1]
        rows.append((kind, desc, first, oracle))
    return rows
