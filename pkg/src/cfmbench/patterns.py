"""Test patterns, test sets and their text formats."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .isa import InstructionSet

__all__ = ["TestPattern", "TestSet", "FormatError", "format_testset", "parse_testset",
           "emit_test_program", "parse_test_program"]

CORE_TEMPLATES = (("init", "init_registers"), ("execute", "run_patterns"),
                  ("collect", "collect_responses"))


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class TestPattern:
    """Operands (a, b) applied while the control code of function ``func`` is set."""
    __test__ = False
    func: int
    a: int
    b: int


@dataclass(frozen=True)
class TestSet:
    __test__ = False
    patterns: tuple[TestPattern, ...] = ()
    seed: int = 0
    isa_digest: str = ""

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def extended(self, more: Iterable[TestPattern]) -> "TestSet":
        return TestSet(self.patterns + tuple(more), self.seed, self.isa_digest)

    def with_patterns(self, patterns: Iterable[TestPattern]) -> "TestSet":
        return TestSet(tuple(patterns), self.seed, self.isa_digest)

    def check(self, iset: InstructionSet) -> None:
        wa, wb = iset.operand_bits
        for idx, pat in enumerate(self.patterns):
            if not 0 <= pat.func < iset.n:
                raise ValueError(f"pattern {idx} references unknown function {pat.func}")
            if not (0 <= pat.a < 1 << wa and 0 <= pat.b < 1 << wb):
                raise ValueError(f"pattern {idx} operands exceed the operand width")


def _hex_digits(bits: int) -> int:
    return max(1, (bits + 3) // 4)


def _operands(pat: TestPattern, iset: InstructionSet) -> str:
    wa, wb = iset.operand_bits
    return f"{pat.a:0{_hex_digits(wa)}x} {pat.b:0{_hex_digits(wb)}x}"


def format_testset(ts: TestSet, iset: InstructionSet) -> str:
    lines = [f"seed {ts.seed}", f"isa {ts.isa_digest or iset.digest()}"]
    mn = iset.mnemonics
    lines += [f"test {mn[p.func]} {_operands(p, iset)}" for p in ts.patterns]
    return "\n".join(lines) + "\n"


def _lookup(iset: InstructionSet, mnemonic: str, lineno: int) -> int:
    try:
        return iset.index_of(mnemonic)
    except KeyError:
        raise FormatError(f"line {lineno}: unknown mnemonic {mnemonic!r}") from None


def _hex(word: str, lineno: int) -> int:
    try:
        return int(word, 16)
    except ValueError:
        raise FormatError(f"line {lineno}: bad hex operand {word!r}") from None


def parse_testset(text: str, iset: InstructionSet) -> TestSet:
    seed, digest, pats = 0, "", []
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        if words[0] == "seed" and len(words) == 2:
            seed = int(words[1])
        elif words[0] == "isa" and len(words) == 2:
            digest = words[1]
        elif words[0] == "test" and len(words) == 4:
            pats.append(TestPattern(_lookup(iset, words[1], lineno),
                                    _hex(words[2], lineno), _hex(words[3], lineno)))
        else:
            raise FormatError(f"line {lineno}: cannot parse {raw.strip()!r}")
    ts = TestSet(tuple(pats), seed, digest)
    ts.check(iset)
    return ts


def emit_test_program(ts: TestSet, iset: InstructionSet) -> str:
    """Serialise the test as a program skeleton: core templates, instructions, operands."""
    lines = ["[CORE]"]
    lines += [f"{role} {name}" for role, name in CORE_TEMPLATES]
    lines += [f"seed {ts.seed}", f"isa {ts.isa_digest or iset.digest()}", "[PATTERNS]"]
    lines += [f"exec {iset.mnemonics[p.func]}" for p in ts.patterns]
    lines.append("[OPERANDS]")
    lines += [_operands(p, iset) for p in ts.patterns]
    return "\n".join(lines) + "\n"


def parse_test_program(text: str, iset: InstructionSet) -> TestSet:
    section = None
    seed, digest = 0, ""
    funcs: list[int] = []
    operands: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            if section not in ("CORE", "PATTERNS", "OPERANDS"):
                raise FormatError(f"line {lineno}: unknown section {line}")
            continue
        words = line.split()
        if section == "CORE":
            if words[0] == "seed":
                seed = int(words[1])
            elif words[0] == "isa":
                digest = words[1]
        elif section == "PATTERNS" and words[0] == "exec" and len(words) == 2:
            funcs.append(_lookup(iset, words[1], lineno))
        elif section == "OPERANDS" and len(words) == 2:
            operands.append((_hex(words[0], lineno), _hex(words[1], lineno)))
        else:
            raise FormatError(f"line {lineno}: unexpected {line!r}")
    if len(funcs) != len(operands):
        raise FormatError(f"{len(funcs)} patterns but {len(operands)} operand lines")
    ts = TestSet(tuple(TestPattern(f, a, b) for f, (a, b) in zip(funcs, operands)), seed, digest)
    ts.check(iset)
    return ts
