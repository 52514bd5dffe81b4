"""The mixed-level flow: high-level generation, redundancy proofs, gate-level check."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .constraints import Constraint, ConstraintMode, ConstraintSet, enumerate_constraints
from .gate import (DEFAULT_MULTI_CAP, DEFAULT_ORACLE_BUDGET, DEFAULT_ORACLE_CAP, DetectionReport,
                   GateFault, GateOracle, OracleStatus, OracleVerdict, enumerate_faults,
                   fault_simulate, synthesize)
from .hlsim import CoverageReport, FaultTable, coverage, simulate
from .isa import InstructionSet
from .patterns import TestPattern, TestSet
from .prover import DEFAULT_PROVER_BUDGET, DEFAULT_PROVER_CAP, Prover, Status, Verdict
from .testgen import DEFAULT_BUDGET, generate

__all__ = ["PipelineConfig", "RunStatus", "MixedLevelReport", "run_procedure2", "format_summary"]


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    prover_cap: int = DEFAULT_PROVER_CAP
    prover_budget: int = DEFAULT_PROVER_BUDGET
    oracle_cap: int = DEFAULT_ORACLE_CAP
    oracle_budget: int = DEFAULT_ORACLE_BUDGET
    mode: ConstraintMode = ConstraintMode.FULL
    distinct: bool = True
    lanes: bool = False
    bridges: bool = False
    multi: int = 0
    multi_cap: int = DEFAULT_MULTI_CAP
    sample_multi: bool = False

    def __post_init__(self):
        for name in ("budget", "prover_cap", "oracle_cap", "multi_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


class RunStatus(enum.Enum):
    RESOLVED = "RESOLVED"
    UNRESOLVED = "UNRESOLVED"


@dataclass
class MixedLevelReport:
    test: TestSet
    constraints: ConstraintSet
    fault_table: FaultTable
    hl_coverage: CoverageReport
    hl_verdicts: dict[Constraint, Verdict]
    gate_report: DetectionReport
    gate_verdicts: dict[GateFault, OracleVerdict]
    status: RunStatus
    retried: bool = False
    alarms: list[GateFault] = field(default_factory=list)

    @property
    def hl_redundant(self) -> list[Constraint]:
        return [c for c, v in self.hl_verdicts.items() if v.status is Status.REDUNDANT]

    @property
    def hl_unknown(self) -> list[Constraint]:
        return [c for c, v in self.hl_verdicts.items() if v.status is Status.UNKNOWN]

    def gate_with(self, status: OracleStatus) -> list[GateFault]:
        return [f for f, v in self.gate_verdicts.items() if v.status is status]

    @property
    def gate_detected(self) -> int:
        return self.gate_report.detected

    @property
    def gate_redundant(self) -> int:
        return len(self.gate_with(OracleStatus.REDUNDANT))

    @property
    def unknown(self) -> int:
        return len(self.gate_with(OracleStatus.UNKNOWN)) + len(self.hl_unknown)

    @property
    def result_line(self) -> str:
        return (f"RESULT hl={round(self.hl_coverage.adjusted_pct, 2)} "
                f"gate_detected={self.gate_detected} gate_redundant={self.gate_redundant} "
                f"unknown={self.unknown}")


def _prove_all(prover: Prover, pending, cache: dict[Constraint, Verdict]) -> dict[Constraint, Verdict]:
    out = {}
    for c in pending:
        if c not in cache:
            cache[c] = prover.prove(c)
        out[c] = cache[c]
    return out


def _witness_patterns(verdicts: dict[Constraint, Verdict], ts: TestSet) -> list[TestPattern]:
    have = set(ts.patterns)
    extra = []
    for c in sorted(verdicts, key=Constraint.order_key):
        v = verdicts[c]
        if v.status is Status.SATISFIABLE:
            p = TestPattern(c.i, *v.witness)
            if p not in have:
                have.add(p)
                extra.append(p)
    return extra


def run_procedure2(iset: InstructionSet, config: PipelineConfig = PipelineConfig()) -> MixedLevelReport:
    """Generate, simulate, prove, retry once if needed, then check at gate level.

    Status is UNRESOLVED when some constraint is neither satisfied nor proven
    redundant after the single retry with doubled budget.  When RESOLVED,
    every undetected gate fault the oracle finds testable is an alarm.
    """
    cs = enumerate_constraints(iset, config.mode, distinct=config.distinct)
    prover = Prover(iset, config.prover_cap, config.prover_budget, config.seed)
    cache: dict[Constraint, Verdict] = {}

    ts, _, uncovered = generate(iset, cs, config.budget, config.seed)
    verdicts = _prove_all(prover, uncovered, cache)
    retried = False
    if any(v.status is Status.UNKNOWN for v in verdicts.values()):
        retried = True
        ts, _, uncovered = generate(iset, cs, 2 * config.budget, config.seed)
        verdicts = _prove_all(prover, uncovered, cache)

    ts = ts.extended(_witness_patterns(verdicts, ts))
    ft = simulate(iset, ts)
    redundant = [c for c, v in verdicts.items() if v.status is Status.REDUNDANT]
    hl = coverage(ft, redundant, cs)
    open_left = [c for c in ft.unsatisfied(cs) if c not in set(redundant)]
    status = RunStatus.UNRESOLVED if open_left else RunStatus.RESOLVED

    model = synthesize(iset)
    faults = enumerate_faults(model, multi=config.multi, bridges=config.bridges,
                              lanes=config.lanes, multi_cap=config.multi_cap,
                              sample=config.sample_multi, seed=config.seed)
    gate_report = fault_simulate(model, iset, ts, faults)
    oracle = GateOracle(model, iset, config.oracle_cap, config.oracle_budget, config.seed)
    gate_verdicts = {f: oracle.classify(f) for f in gate_report.undetected()}
    alarms = []
    if status is RunStatus.RESOLVED:
        alarms = [f for f, v in gate_verdicts.items() if v.status is OracleStatus.TESTABLE]
    return MixedLevelReport(ts, cs, ft, hl, verdicts, gate_report, gate_verdicts,
                            status, retried, alarms)


def format_summary(report: MixedLevelReport) -> str:
    hl = report.hl_coverage
    lines = [
        f"status {report.status.value}",
        f"patterns {len(report.test)}",
        f"hl_satisfied {hl.satisfied}/{hl.total}",
        f"hl_redundant {hl.redundant_excluded}",
        f"hl_raw {hl.raw_pct:.2f}",
        f"hl_adjusted {hl.adjusted_pct:.2f}",
        f"hl_unknown {len(report.hl_unknown)}",
        f"retried {int(report.retried)}",
        f"gate_faults {report.gate_report.total}",
        f"gate_detected {report.gate_detected}",
        f"gate_redundant {report.gate_redundant}",
        f"gate_unknown {len(report.gate_with(OracleStatus.UNKNOWN))}",
        f"gate_testable_undetected {len(report.gate_with(OracleStatus.TESTABLE))}",
        f"alarms {len(report.alarms)}",
    ]
    lines += [f"alarm {f.descriptor}" for f in report.alarms]
    lines.append(report.result_line)
    return "\n".join(lines) + "\n"
