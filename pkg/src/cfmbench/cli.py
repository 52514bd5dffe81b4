"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 unresolved coverage, 4 soundness alarm.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .constraints import ConstraintMode, enumerate_constraints
from .gate import (DEFAULT_ORACLE_CAP, GateOracle, enumerate_faults, fault_simulate,
                   format_detection_report, parse_detection_report, synthesize)
from .hlsim import CoverageReport, coverage, format_fault_table, parse_fault_table, \
    render_fault_table, simulate
from .isa import InstructionSet, IsaError, load_isa
from .patterns import FormatError, emit_test_program, format_testset, parse_testset
from .pipeline import PipelineConfig, RunStatus, format_summary, run_procedure2
from .prover import DEFAULT_PROVER_CAP, Prover, format_redundancy_report, \
    parse_redundancy_report
from .testgen import DEFAULT_BUDGET, generate

EXIT_OK, EXIT_INPUT, EXIT_UNRESOLVED, EXIT_ALARM = 0, 2, 3, 4


class InputError(Exception):
    pass


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError(f"{text} is not a u64")
    return v


def _positive(text: str) -> int:
    v = int(text, 0)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def _load(args) -> InstructionSet:
    try:
        return load_isa(args.isa)
    except OSError as e:
        raise InputError(f"cannot read ISA {args.isa}: {e.strerror}") from None
    except IsaError as e:
        raise InputError(f"{args.isa}: {e}") from None


def _load_test(path: str, iset: InstructionSet):
    try:
        return parse_testset(Path(path).read_text(encoding="utf-8"), iset)
    except OSError as e:
        raise InputError(f"cannot read test {path}: {e.strerror}") from None
    except (FormatError, ValueError) as e:
        raise InputError(f"{path}: {e}") from None


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _constraints(args, iset):
    return enumerate_constraints(iset, ConstraintMode(args.mode), distinct=not args.no_distinct)


def format_coverage(cov: CoverageReport, uncovered, iset) -> str:
    lines = [f"satisfied {cov.satisfied}/{cov.total}",
             f"redundant {cov.redundant_excluded}",
             f"raw {cov.raw_pct:.2f}",
             f"adjusted {cov.adjusted_pct:.2f}"]
    lines += [f"uncovered {c.describe(iset)}" for c in uncovered]
    return "\n".join(lines) + "\n"


def cmd_gen(args) -> int:
    iset = _load(args)
    cs = _constraints(args, iset)
    ts, ft, uncovered = generate(iset, cs, args.budget, args.seed)
    out = Path(args.out)
    _write(out, "test.txt", format_testset(ts, iset))
    _write(out, "program.txt", emit_test_program(ts, iset))
    _write(out, "faulttable.txt", format_fault_table(ft, iset))
    _write(out, "coverage.txt", format_coverage(coverage(ft, cs=cs), uncovered, iset))
    return EXIT_OK


def cmd_hlsim(args) -> int:
    iset = _load(args)
    ts = _load_test(args.test, iset)
    cs = _constraints(args, iset)
    ft = simulate(iset, ts)
    out = Path(args.out)
    _write(out, "faulttable.txt", format_fault_table(ft, iset))
    _write(out, "coverage.txt", format_coverage(coverage(ft, cs=cs), ft.unsatisfied(cs), iset))
    return EXIT_OK


def _faults(args, model):
    try:
        return enumerate_faults(model, multi=args.multi, bridges=args.bridges, lanes=args.lanes,
                                sample=args.sample_multi, seed=args.seed)
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_gatesim(args) -> int:
    iset = _load(args)
    ts = _load_test(args.test, iset)
    model = synthesize(iset)
    report = fault_simulate(model, iset, ts, _faults(args, model))
    oracle = GateOracle(model, iset, args.oracle_cap, seed=args.seed)
    verdicts = {f: oracle.classify(f) for f in report.undetected()}
    _write(Path(args.out), "gatereport.txt", format_detection_report(report, verdicts))
    return EXIT_OK


def cmd_prove(args) -> int:
    iset = _load(args)
    cs = _constraints(args, iset)
    pending = list(cs)
    if args.test:
        pending = simulate(iset, _load_test(args.test, iset)).unsatisfied(cs)
    prover = Prover(iset, args.prover_cap, seed=args.seed)
    verdicts = {c: prover.prove(c) for c in pending}
    _write(Path(args.out), "redundancy.txt", format_redundancy_report(verdicts, iset))
    return EXIT_OK


def cmd_run(args) -> int:
    iset = _load(args)
    try:
        config = PipelineConfig(seed=args.seed, budget=args.budget, prover_cap=args.prover_cap,
                                oracle_cap=args.oracle_cap, mode=ConstraintMode(args.mode),
                                distinct=not args.no_distinct, lanes=args.lanes,
                                bridges=args.bridges, multi=args.multi,
                                sample_multi=args.sample_multi)
        report = run_procedure2(iset, config)
    except ValueError as e:
        raise InputError(str(e)) from None
    out = Path(args.out)
    _write(out, "test.txt", format_testset(report.test, iset))
    _write(out, "program.txt", emit_test_program(report.test, iset))
    _write(out, "faulttable.txt", format_fault_table(report.fault_table, iset))
    _write(out, "coverage.txt", format_coverage(
        report.hl_coverage, report.fault_table.unsatisfied(report.constraints), iset))
    _write(out, "redundancy.txt", format_redundancy_report(report.hl_verdicts, iset))
    _write(out, "gatereport.txt", format_detection_report(report.gate_report,
                                                          report.gate_verdicts))
    _write(out, "summary.txt", format_summary(report))
    print(report.result_line)
    if report.alarms:
        for f in report.alarms:
            print(f"alarm: undetected fault {f.descriptor} is testable", file=sys.stderr)
        return EXIT_ALARM
    if report.status is RunStatus.UNRESOLVED:
        print("unresolved: some constraints neither satisfied nor proven redundant",
              file=sys.stderr)
        return EXIT_UNRESOLVED
    return EXIT_OK


def _read_optional(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return ""
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def cmd_report(args) -> int:
    base = Path(args.dir)
    ft_text = _read_optional(Path(args.faulttable) if args.faulttable else base / "faulttable.txt")
    gate_text = _read_optional(Path(args.gatereport) if args.gatereport else base / "gatereport.txt")
    red_text = _read_optional(Path(args.redundancy) if args.redundancy else base / "redundancy.txt")

    parts = ["== fault table =="]
    if ft_text.strip():
        try:
            names, ft = parse_fault_table(ft_text)
        except (ValueError, KeyError, IndexError) as e:
            raise InputError(f"bad fault table: {e}") from None
        parts.append(render_fault_table(ft, names).rstrip("\n"))
    parts.append("== gate-level detection ==")
    rows = parse_detection_report(gate_text)
    if rows:
        detected = sum(1 for r in rows if r[2] is not None)
        parts.append(f"faults {len(rows)} detected {detected} undetected {len(rows) - detected}")
        for kind, desc, first, oracle in rows:
            if first is None:
                parts.append(f"  {kind} {desc} : {oracle or 'unclassified'}")
    parts.append("== redundancy proofs ==")
    parts += [f"  {desc} : {outcome}" for desc, outcome in parse_redundancy_report(red_text)]
    print("\n".join(parts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cfmbench",
                                 description="Control-fault test generation and redundancy analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, test=False, gen=False, gate=False, prove=False):
        p.add_argument("--isa", required=True, help="instruction set description")
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--mode", choices=[m.value for m in ConstraintMode], default="full")
        p.add_argument("--no-distinct", action="store_true",
                       help="drop the word-level y_i != y_j constraints")
        if test:
            p.add_argument("--test", required=test == "required", help="test set file")
        if gen:
            p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
        if gate:
            p.add_argument("--oracle-cap", type=_positive, default=DEFAULT_ORACLE_CAP)
            p.add_argument("--lanes", action="store_true", help="per-lane fault sites")
            p.add_argument("--bridges", action="store_true", help="add bridging faults")
            p.add_argument("--multi", type=int, default=0, metavar="S",
                           help="add multiple SAF of size 2..S")
            p.add_argument("--sample-multi", action="store_true",
                           help="sample multiple faults beyond the cap")
        if prove:
            p.add_argument("--prover-cap", type=_positive, default=DEFAULT_PROVER_CAP)

    common(sub.add_parser("gen", help="generate a test"), gen=True)
    common(sub.add_parser("hlsim", help="high-level fault simulation"), test="required")
    common(sub.add_parser("gatesim", help="gate-level fault simulation"), test="required", gate=True)
    common(sub.add_parser("prove", help="prove constraint redundancy"), test=True, prove=True)
    common(sub.add_parser("run", help="full mixed-level flow"), gen=True, gate=True, prove=True)
    rep = sub.add_parser("report", help="consolidated text report")
    rep.add_argument("--dir", default=".", help="directory holding the output files")
    rep.add_argument("--faulttable")
    rep.add_argument("--gatereport")
    rep.add_argument("--redundancy")
    return ap


COMMANDS = {"gen": cmd_gen, "hlsim": cmd_hlsim, "gatesim": cmd_gatesim, "prove": cmd_prove,
            "run": cmd_run, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
