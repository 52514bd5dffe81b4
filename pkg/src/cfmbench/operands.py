"""Operand sources: the corner-case deck, exhaustive pools and random streams."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .isa import InstructionSet, Mode

__all__ = ["corner_values", "corner_case_deck", "space_bits", "exhaustive_pool",
           "random_operands", "candidate_stream"]


def corner_values(m: int) -> list[int]:
    """Distinct corner words for width m, in deck order.

    all-zeros, all-ones, 1...110, 0...001, 0101..., 1010..., then the
    one-hot words from bit 0 upwards.
    """
    full = (1 << m) - 1
    alt = int("01" * m, 2) & full
    values = [0, full, full - 1 if m > 1 else 0, 1, alt, alt ^ full]
    values += [1 << k for k in range(m)]
    return list(dict.fromkeys(values))


def corner_case_deck(iset: InstructionSet) -> list[tuple[int, int]]:
    """Fixed, ordered list of operand pairs tried before random sampling.

    OPS mode: every ordered pair of :func:`corner_values` (169 pairs for m=8).
    DIRECT mode: result vectors with whole slots at all-ones/all-zeros, namely
    all slots ones, each single slot zeroed, each single slot set, all zeros;
    operand b is 0.
    """
    if iset.mode is Mode.DIRECT:
        n, m = iset.n, iset.m
        slot = (1 << m) - 1
        ones = sum(slot << (i * m) for i in range(n))
        a_values = [ones] + [ones ^ (slot << (i * m)) for i in range(n)]
        a_values += [slot << (i * m) for i in range(n)] + [0]
        return [(a, 0) for a in dict.fromkeys(a_values)]
    values = corner_values(iset.m)
    return [(a, b) for a in values for b in values]


def space_bits(iset: InstructionSet) -> int:
    """log2 of the operand-pair space size."""
    wa, wb = iset.operand_bits
    return wa + wb


def exhaustive_pool(iset: InstructionSet) -> tuple[np.ndarray, np.ndarray]:
    """Every operand pair, ``a`` varying slowest."""
    wa, wb = iset.operand_bits
    idx = np.arange(1 << (wa + wb), dtype=np.uint64)
    return idx >> np.uint64(wb), idx & np.uint64((1 << wb) - 1)


def _uniform(rng: np.random.Generator, width: int, size: int) -> np.ndarray:
    if width == 0:
        return np.zeros(size, dtype=np.uint64)
    if width == 64:
        return rng.integers(0, (1 << 64) - 1, size=size, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 1 << width, size=size, dtype=np.uint64)


def random_operands(iset: InstructionSet, rng: np.random.Generator,
                    size: int) -> tuple[np.ndarray, np.ndarray]:
    wa, wb = iset.operand_bits
    a = _uniform(rng, wa, size)
    b = _uniform(rng, wb, size)
    return a, b


def candidate_stream(iset: InstructionSet, rng: np.random.Generator, budget: int,
                     chunk: int = 4096, deck: bool = True
                     ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield operand batches: the corner deck first, then uniform samples.

    At most ``budget`` pairs are produced in total.
    """
    left = budget
    if deck:
        pairs = corner_case_deck(iset)[:left]
        if pairs:
            arr = np.array(pairs, dtype=np.uint64).reshape(-1, 2)
            yield arr[:, 0].copy(), arr[:, 1].copy()
            left -= len(pairs)
    while left > 0:
        size = min(chunk, left)
        yield random_operands(iset, rng, size)
        left -= size
