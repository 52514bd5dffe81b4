"""Instruction-set descriptions and ALU operation semantics.

An :class:`InstructionSet` is the function set executed by the ALU: every
function has a mnemonic, a p-bit control code and an operation taken from a
fixed catalog.  Values are plain Python ints interpreted as m-bit vectors;
the vectorised evaluators work on ``numpy.uint64`` arrays, so ``m <= 64``.

In DIRECT mode the functions carry no semantics of their own.  Operand ``a``
packs the n result words (``y_1`` in the low m bits, ``y_2`` above it, ...)
and function i simply returns its slot, which lets hand-written result
vectors be injected verbatim.  Operand ``b`` is unused there.
"""

from __future__ import annotations

import enum
import hashlib
import importlib.resources
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "BitCone", "Mode", "Polarity", "IsaError", "OpDef", "CATALOG",
    "FunctionSpec", "InstructionSet", "parse_isa", "load_isa", "bundled_isa",
    "eval_function", "legal_codes", "code_str", "shift_amount_bits", "make_isa",
]


class Polarity(enum.Enum):
    ACTIVE_HIGH = "active_high"
    ACTIVE_LOW = "active_low"


class Mode(enum.Enum):
    OPS = "ops"
    DIRECT = "direct"


class BitCone(enum.Enum):
    """Which operand bits can influence result bit k."""
    BIT_LOCAL = "bit_local"   # operand bits k only
    LOW_CONE = "low_cone"     # operand bits 0..k
    FULL_WORD = "full_word"   # anything


class IsaError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def shift_amount_bits(m: int) -> int:
    """ceil(log2 m): how many low bits of ``b`` form a shift amount."""
    return (m - 1).bit_length()


def _mask(m: int) -> int:
    return (1 << m) - 1


# -- scalar semantics (unmasked; callers mask to m bits) ---------------------

def _s_slt(a, b, m):
    sb = 1 << (m - 1)
    return int((a ^ sb) < (b ^ sb))


def _s_sra(a, b, m):
    s = b & _mask(shift_amount_bits(m))
    r = a >> s
    if a >> (m - 1) & 1:
        r |= _mask(m) & ~(_mask(m) >> s)
    return r


_SCALAR: dict[str, Callable[[int, int, int], int]] = {
    "ADD": lambda a, b, m: a + b,
    "SUB": lambda a, b, m: a - b,
    "AND": lambda a, b, m: a & b,
    "OR": lambda a, b, m: a | b,
    "XOR": lambda a, b, m: a ^ b,
    "NOR": lambda a, b, m: ~(a | b),
    "SLT": _s_slt,
    "SLTU": lambda a, b, m: int(a < b),
    "SLL": lambda a, b, m: a << (b & _mask(shift_amount_bits(m))),
    "SRL": lambda a, b, m: a >> (b & _mask(shift_amount_bits(m))),
    "SRA": _s_sra,
    "INC": lambda a, b, m: a + 1,
    "DEC": lambda a, b, m: a - 1,
    "OUI": lambda a, b, m: a | (b << (m // 2)),
}


# -- vectorised semantics on uint64 arrays -----------------------------------

def _u(x: int) -> np.uint64:
    return np.uint64(x)


def _v_sra(a, b, m):
    full = _u(_mask(m))
    s = b & _u(_mask(shift_amount_bits(m)))
    r = a >> s
    neg = ((a >> _u(m - 1)) & _u(1)).astype(bool)
    fill = full & ~(full >> s)
    return np.where(neg, r | fill, r)


def _v_slt(a, b, m):
    sb = _u(1 << (m - 1))
    return ((a ^ sb) < (b ^ sb)).astype(np.uint64)


_VECTOR: dict[str, Callable[[np.ndarray, np.ndarray, int], np.ndarray]] = {
    "ADD": lambda a, b, m: a + b,
    "SUB": lambda a, b, m: a - b,
    "AND": lambda a, b, m: a & b,
    "OR": lambda a, b, m: a | b,
    "XOR": lambda a, b, m: a ^ b,
    "NOR": lambda a, b, m: ~(a | b),
    "SLT": _v_slt,
    "SLTU": lambda a, b, m: (a < b).astype(np.uint64),
    "SLL": lambda a, b, m: a << (b & _u(_mask(shift_amount_bits(m)))),
    "SRL": lambda a, b, m: a >> (b & _u(_mask(shift_amount_bits(m)))),
    "SRA": _v_sra,
    "INC": lambda a, b, m: a + _u(1),
    "DEC": lambda a, b, m: a - _u(1),
    "OUI": lambda a, b, m: a | (b << _u(m // 2)),
}


@dataclass(frozen=True)
class OpDef:
    name: str
    arity: int
    cone: BitCone


CATALOG: dict[str, OpDef] = {
    op.name: op for op in [
        OpDef("ADD", 2, BitCone.LOW_CONE),
        OpDef("SUB", 2, BitCone.LOW_CONE),
        OpDef("AND", 2, BitCone.BIT_LOCAL),
        OpDef("OR", 2, BitCone.BIT_LOCAL),
        OpDef("XOR", 2, BitCone.BIT_LOCAL),
        OpDef("NOR", 2, BitCone.BIT_LOCAL),
        OpDef("SLT", 2, BitCone.FULL_WORD),
        OpDef("SLTU", 2, BitCone.FULL_WORD),
        # low result bits of a left shift depend on the shift-amount bits of b
        OpDef("SLL", 2, BitCone.FULL_WORD),
        OpDef("SRL", 2, BitCone.FULL_WORD),
        OpDef("SRA", 2, BitCone.FULL_WORD),
        OpDef("INC", 1, BitCone.LOW_CONE),
        OpDef("DEC", 1, BitCone.LOW_CONE),
        OpDef("OUI", 2, BitCone.LOW_CONE),
        OpDef("DIRECT", 1, BitCone.FULL_WORD),
    ]
}


def code_str(code: int, p: int) -> str:
    """Render a control code with c_p leftmost, c_1 rightmost."""
    return format(code, f"0{p}b")


@dataclass(frozen=True)
class FunctionSpec:
    index: int        # 0-based position in the instruction set
    mnemonic: str
    code: int
    op: str

    @property
    def arity(self) -> int:
        return CATALOG[self.op].arity

    @property
    def cone(self) -> BitCone:
        return CATALOG[self.op].cone


def eval_function(f: FunctionSpec, a: int, b: int, m: int) -> int:
    """Result of ``f`` on operands ``a``, ``b``, masked to m bits."""
    if f.op == "DIRECT":
        return (a >> (f.index * m)) & _mask(m)
    return _SCALAR[f.op](a, b, m) & _mask(m)


def _eval_array(f: FunctionSpec, a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    full = _u(_mask(m))
    if f.op == "DIRECT":
        return (a >> _u(f.index * m)) & full
    return _VECTOR[f.op](a, b, m) & full


@dataclass(frozen=True)
class InstructionSet:
    functions: tuple[FunctionSpec, ...]
    width: int
    control: int
    polarity: Polarity = Polarity.ACTIVE_HIGH
    mode: Mode = Mode.OPS

    def __post_init__(self):
        if not 1 <= self.width <= 64:
            raise IsaError(f"width {self.width} out of range 1..64")
        if not 1 <= self.control <= 16:
            raise IsaError(f"control {self.control} out of range 1..16")
        if not self.functions:
            raise IsaError("instruction set has no functions")
        seen_codes: dict[int, str] = {}
        seen_names: set[str] = set()
        for pos, f in enumerate(self.functions):
            if f.index != pos:
                raise IsaError(f"function {f.mnemonic} has index {f.index}, expected {pos}")
            if f.op not in CATALOG:
                raise IsaError(f"unknown operation {f.op!r}")
            if (f.op == "DIRECT") != (self.mode is Mode.DIRECT):
                raise IsaError(f"operation {f.op} not allowed in {self.mode.value} mode")
            if not 0 <= f.code < 1 << self.control:
                raise IsaError(f"code of {f.mnemonic} wider than {self.control} bits")
            if f.code in seen_codes:
                raise IsaError(f"duplicate control code {code_str(f.code, self.control)} "
                               f"({seen_codes[f.code]}, {f.mnemonic})")
            if f.mnemonic in seen_names:
                raise IsaError(f"duplicate mnemonic {f.mnemonic}")
            seen_codes[f.code] = f.mnemonic
            seen_names.add(f.mnemonic)
        if self.mode is Mode.DIRECT and self.n * self.width > 64:
            raise IsaError("direct mode needs n*width <= 64")

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def m(self) -> int:
        return self.width

    @property
    def p(self) -> int:
        return self.control

    @property
    def full(self) -> int:
        return _mask(self.width)

    @property
    def operand_bits(self) -> tuple[int, int]:
        """Widths of operands (a, b); DIRECT mode packs all results into a."""
        if self.mode is Mode.DIRECT:
            return self.n * self.width, 0
        return self.width, self.width

    @property
    def mnemonics(self) -> list[str]:
        return [f.mnemonic for f in self.functions]

    def index_of(self, mnemonic: str) -> int:
        for f in self.functions:
            if f.mnemonic == mnemonic:
                return f.index
        raise KeyError(mnemonic)

    def eval(self, i: int, a: int, b: int) -> int:
        return eval_function(self.functions[i], a, b, self.width)

    def results(self, a: int, b: int) -> list[int]:
        return [eval_function(f, a, b, self.width) for f in self.functions]

    def eval_all(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Results of every function on operand arrays, shape (n, len(a))."""
        a = np.asarray(a, dtype=np.uint64)
        b = np.asarray(b, dtype=np.uint64)
        out = np.empty((self.n, a.shape[0]), dtype=np.uint64)
        for f in self.functions:
            out[f.index] = _eval_array(f, a, b, self.width)
        return out

    def to_text(self) -> str:
        lines = [f"width {self.width}", f"control {self.control}",
                 f"polarity {self.polarity.value}", f"mode {self.mode.value}"]
        for f in self.functions:
            line = f"func {f.mnemonic} code {code_str(f.code, self.control)}"
            if self.mode is Mode.OPS:
                line += f" op {f.op}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def legal_codes(iset: InstructionSet) -> frozenset[int]:
    return frozenset(f.code for f in iset.functions)


_FUNC_RE = re.compile(r"^func\s+(\S+)\s+code\s+(\S+)(?:\s+op\s+(\S+))?$")


def parse_isa(text: str) -> InstructionSet:
    """Parse an ISA document; errors carry the offending line number."""
    width = control = None
    polarity = Polarity.ACTIVE_HIGH
    mode = Mode.OPS
    raw_funcs: list[tuple[int, str, str, str | None]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        key = words[0].lower()
        if key in ("width", "control"):
            if len(words) != 2 or not words[1].isdigit():
                raise IsaError(f"expected '{key} <int>'", lineno)
            value = int(words[1])
            hi = 64 if key == "width" else 16
            if not 1 <= value <= hi:
                raise IsaError(f"{key} {value} out of range 1..{hi}", lineno)
            if raw_funcs:
                raise IsaError(f"'{key}' must precede func lines", lineno)
            if key == "width":
                width = value
            else:
                control = value
        elif key == "polarity":
            try:
                polarity = Polarity(words[1].lower())
            except (IndexError, ValueError):
                raise IsaError("expected 'polarity active_high|active_low'", lineno) from None
        elif key == "mode":
            try:
                mode = Mode(words[1].lower())
            except (IndexError, ValueError):
                raise IsaError("expected 'mode ops|direct'", lineno) from None
            if raw_funcs:
                raise IsaError("'mode' must precede func lines", lineno)
        elif key == "func":
            match = _FUNC_RE.match(line)
            if not match:
                raise IsaError("expected 'func <mnemonic> code <bits> op <name>'", lineno)
            raw_funcs.append((lineno, *match.groups()))
        else:
            raise IsaError(f"unknown directive {words[0]!r}", lineno)

    if width is None or control is None:
        raise IsaError("document must declare both 'width' and 'control'")

    funcs: list[FunctionSpec] = []
    codes: dict[int, str] = {}
    for lineno, mnemonic, bits, op in raw_funcs:
        if not set(bits) <= {"0", "1"}:
            raise IsaError(f"code {bits!r} is not a binary string", lineno)
        if len(bits) != control:
            raise IsaError(f"code {bits!r} does not have {control} bits", lineno)
        code = int(bits, 2)
        if code in codes:
            raise IsaError(f"duplicate control code {bits} (already used by {codes[code]})", lineno)
        if any(f.mnemonic == mnemonic for f in funcs):
            raise IsaError(f"duplicate mnemonic {mnemonic}", lineno)
        if mode is Mode.DIRECT:
            if op is not None and op.upper() != "DIRECT":
                raise IsaError(f"direct mode functions take no catalog op (got {op})", lineno)
            op_name = "DIRECT"
        else:
            if op is None:
                raise IsaError(f"function {mnemonic} needs 'op <name>'", lineno)
            op_name = op.upper()
            if op_name not in CATALOG or op_name == "DIRECT":
                raise IsaError(f"unknown operation {op!r}", lineno)
        codes[code] = mnemonic
        funcs.append(FunctionSpec(len(funcs), mnemonic, code, op_name))

    if len(funcs) < 2:
        raise IsaError(f"instruction set needs at least 2 functions, got {len(funcs)}")
    return InstructionSet(tuple(funcs), width, control, polarity, mode)


def load_isa(path) -> InstructionSet:
    with open(path, encoding="utf-8") as fh:
        return parse_isa(fh.read())


def bundled_isa(name: str) -> InstructionSet:
    """Load one of the ISA documents shipped in ``cfmbench/data``."""
    res = importlib.resources.files("cfmbench").joinpath("data", f"{name}.isa")
    return parse_isa(res.read_text(encoding="utf-8"))


def make_isa(ops: Sequence[str], codes: Iterable[int], width: int, control: int,
             polarity: Polarity = Polarity.ACTIVE_HIGH,
             mnemonics: Sequence[str] | None = None) -> InstructionSet:
    """Build an OPS-mode instruction set directly from op names and codes."""
    names = list(mnemonics) if mnemonics else [f"{op}{i}" if ops.count(op) > 1 else op
                                               for i, op in enumerate(ops)]
    funcs = tuple(FunctionSpec(i, names[i], c, op.upper())
                  for i, (op, c) in enumerate(zip(ops, codes)))
    return InstructionSet(funcs, width, control, polarity, Mode.OPS)
