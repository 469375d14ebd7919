"""Sequence diagnostics: eventual periodicity and block-frequency normality.

Cycle detection reports the minimal (transient, period) pair under which
the observed window is eventually periodic; a candidate period counts
only if the periodic part is seen in full at least twice inside the
search bound, which keeps the reported period minimal and divisibility
against longer candidates meaningful.

The normality check compares non-overlapping block frequencies of every
length up to L against 2^-L, with the acceptance threshold
eps(l, n) = sqrt(l * log2(n) / n) per block length.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .bitstreams import BitString
from .errors import InsufficientLength

MIN_BLOCKS = 16


def _as_bits(seq) -> str:
    if isinstance(seq, BitString):
        return seq.bits
    if isinstance(seq, str):
        if seq.strip("01"):
            raise ValueError("bit sequence may contain only 0/1 characters")
        return seq
    return BitString.from_ints(seq).bits


@dataclass(frozen=True)
class CycleReport:
    found: bool
    transient: int
    period: int
    bound: int

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "transient": self.transient,
            "period": self.period,
            "bound": self.bound,
        }


def detect_cycle(seq, bound: int | None = None) -> CycleReport:
    """Minimal (transient, period) with seq[i] = seq[i+p] on [t, bound-p).

    For each candidate period the least feasible transient sits just past
    the last mismatched offset; a pair counts only when t + 2p <= bound
    (the periodic part observed in full at least twice).  Among feasible
    pairs the lexicographically least (transient, period) is reported:
    transient-first, or a stray repeat near the window's end would
    masquerade as a short period with a long bogus transient.
    """
    bits = _as_bits(seq)
    if bound is None:
        bound = len(bits)
    if bound < 2:
        raise ValueError("cycle search bound must be >= 2")
    if len(bits) < bound:
        raise ValueError("sequence shorter than the search bound")
    best: tuple[int, int] | None = None
    for period in range(1, bound // 2 + 1):
        transient = 0
        for i in range(bound - period - 1, -1, -1):
            if bits[i] != bits[i + period]:
                transient = i + 1
                break
        if transient + 2 * period <= bound and (best is None or transient < best[0]):
            best = (transient, period)
            if transient == 0:
                break
    if best is None:
        return CycleReport(False, 0, 0, bound)
    return CycleReport(True, best[0], best[1], bound)


def block_frequencies(seq, block_len: int) -> dict[str, float]:
    """Frequencies of the floor(n/l) non-overlapping l-blocks.

    All 2^l patterns are present in the table (zero-filled) for l <= 12.
    """
    bits = _as_bits(seq)
    if block_len < 1:
        raise ValueError("block length must be >= 1")
    if len(bits) < block_len:
        raise ValueError("sequence shorter than one block")
    n_blocks = len(bits) // block_len
    counts = Counter(
        bits[i : i + block_len] for i in range(0, n_blocks * block_len, block_len)
    )
    freqs = {block: c / n_blocks for block, c in counts.items()}
    if block_len <= 12:
        for value in range(1 << block_len):
            freqs.setdefault(format(value, f"0{block_len}b"), 0.0)
    return freqs


def default_epsilon(block_len: int, n: int) -> float:
    return math.sqrt(block_len * math.log2(n) / n)


@dataclass(frozen=True)
class BlockLengthResult:
    block_len: int
    n_blocks: int
    frequencies: dict
    max_deviation: float
    epsilon: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "block_len": self.block_len,
            "n_blocks": self.n_blocks,
            "frequencies": dict(sorted(self.frequencies.items())),
            "max_deviation": self.max_deviation,
            "epsilon": self.epsilon,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class NormalityReport:
    n: int
    max_block_len: int
    results: tuple[BlockLengthResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "max_block_len": self.max_block_len,
            "passed": self.passed,
            "per_block_len": [r.to_dict() for r in self.results],
        }


def borel_normality_check(
    seq,
    max_block_len: int,
    n: int | None = None,
    epsilon: Callable[[int, int], float] | None = None,
) -> NormalityReport:
    """Pass iff, for every l <= L, all l-block frequencies sit within
    eps(l, n) of 2^-l over the first n bits."""
    bits = _as_bits(seq)
    if max_block_len < 1:
        raise ValueError("max block length must be >= 1")
    if n is None:
        n = len(bits)
    if n > len(bits):
        raise ValueError(f"requested prefix of {n} bits, have {len(bits)}")
    if n // max_block_len < MIN_BLOCKS:
        raise InsufficientLength(
            f"{n} bits give {n // max_block_len} blocks of length "
            f"{max_block_len}; at least {MIN_BLOCKS} required"
        )
    eps_fn = epsilon or default_epsilon
    prefix = bits[:n]
    results = []
    for block_len in range(1, max_block_len + 1):
        freqs = block_frequencies(prefix, block_len)
        expected = 2.0**-block_len
        observed = max(abs(f - expected) for f in freqs.values())
        if block_len > 12 and len(freqs) < (1 << block_len):
            observed = max(observed, expected)  # some pattern never occurred
        eps = eps_fn(block_len, n)
        results.append(
            BlockLengthResult(
                block_len=block_len,
                n_blocks=n // block_len,
                frequencies=freqs,
                max_deviation=observed,
                epsilon=eps,
                passed=observed <= eps,
            )
        )
    return NormalityReport(n=n, max_block_len=max_block_len, results=tuple(results))
