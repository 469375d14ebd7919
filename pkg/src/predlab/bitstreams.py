"""Lazy, reproducible infinite bit sequences.

Streams are immutable value descriptors: bit ``j`` (1-based) is a pure
function of the stream's parameters, so the same stream may be read from
any number of threads and re-reads always agree.  They serve both as
experiment seeds and as the concrete carrier of a trial's hidden
parameter.

The seeded-noise generator is splitmix64 (public-domain reference by
S. Vigna): output ``i`` is ``mix64(seed + i * 0x9E3779B97F4B7C15)`` with
the finaliser multipliers ``0xBF58476D1CE4E5B9`` / ``0x94D049BB133111EB``
and xor-shifts 30, 27, 31.  Being counter-based it gives O(1) access to
any bit.  Bits are taken most-significant-first within each 64-bit
output, matching the file-backed byte convention.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache, cached_property
from pathlib import Path

from .errors import PrecisionRange, StreamExhausted, UnknownRule

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4B7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def splitmix64_value(seed: int, i: int) -> int:
    """i-th 64-bit output (i >= 1) of splitmix64 started from ``seed``."""
    return _mix64((seed + i * _GAMMA) & _MASK64)


@dataclass(frozen=True)
class BitString:
    """Finite string of binary digits, indexed 1-based like x_1 x_2 x_3..."""

    bits: str = ""

    def __post_init__(self):
        if self.bits.strip("01"):
            raise ValueError(f"bit string may contain only 0/1: {self.bits!r}")

    @classmethod
    def from_ints(cls, values) -> "BitString":
        return cls("".join("1" if v else "0" for v in values))

    @classmethod
    def _trusted(cls, bits: str) -> "BitString":
        # hot-path constructor for strings already known to be 0/1
        out = object.__new__(cls)
        object.__setattr__(out, "bits", bits)
        return out

    def bit(self, j: int) -> int:
        if not 1 <= j <= len(self.bits):
            raise IndexError(f"bit index {j} outside 1..{len(self.bits)}")
        return int(self.bits[j - 1])

    def ints(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return (int(c) for c in self.bits)

    def __add__(self, other: "BitString") -> "BitString":
        return BitString(self.bits + other.bits)

    def __str__(self) -> str:
        return self.bits


class BitStream(ABC):
    """Infinite bit source; ``bit(j)`` is pure in (parameters, j)."""

    @abstractmethod
    def bit(self, j: int) -> int:
        """The j-th bit, 1-based."""

    def prefix(self, n: int) -> BitString:
        """Bits 1..n as a BitString."""
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        return BitString("".join(str(self.bit(j)) for j in range(1, n + 1)))

    def window_bits(self, lo: int, hi: int) -> str:
        """Bits lo..hi inclusive (1-based) as a 0/1 string."""
        return self.prefix(hi).bits[lo - 1 :]


@dataclass(frozen=True)
class PeriodicStream(BitStream):
    """Finite prefix followed by an endlessly repeated non-empty cycle."""

    head: str = ""
    cycle: str = "0"

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("periodic stream needs a non-empty cycle")
        if (self.head + self.cycle).strip("01"):
            raise ValueError("head and cycle must be 0/1 strings")

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        if j <= len(self.head):
            return int(self.head[j - 1])
        return int(self.cycle[(j - len(self.head) - 1) % len(self.cycle)])

    def prefix(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        if n <= len(self.head):
            return BitString(self.head[:n])
        reps = (n - len(self.head)) // len(self.cycle) + 1
        return BitString((self.head + self.cycle * reps)[:n])

    def window_bits(self, lo: int, hi: int) -> str:
        if hi <= len(self.head):
            return self.head[lo - 1 : hi]
        reps = (hi - len(self.head)) // len(self.cycle) + 1
        return (self.head + self.cycle * reps)[lo - 1 : hi]


@dataclass(frozen=True)
class SeededNoiseStream(BitStream):
    """splitmix64-backed pseudo-random bits; same seed, same stream."""

    seed: int

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        block = splitmix64_value(self.seed, 1 + (j - 1) // 64)
        return (block >> (63 - (j - 1) % 64)) & 1

    def prefix(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        n_blocks = (n + 63) // 64
        chunks = (
            format(splitmix64_value(self.seed, i), "064b")
            for i in range(1, n_blocks + 1)
        )
        return BitString("".join(chunks)[:n])


@dataclass(frozen=True)
class FileStream(BitStream):
    """Raw-byte file read most-significant-bit-first within each byte."""

    path: str
    total_bits: int | None = None

    @cached_property
    def _data(self) -> bytes:
        return Path(self.path).read_bytes()

    @property
    def limit(self) -> int:
        on_disk = 8 * len(self._data)
        return on_disk if self.total_bits is None else min(self.total_bits, on_disk)

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        if j > self.limit:
            raise StreamExhausted(
                f"bit {j} requested but {self.path} holds {self.limit} bits"
            )
        byte = self._data[(j - 1) // 8]
        return (byte >> (7 - (j - 1) % 8)) & 1

    def prefix(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        if n > self.limit:
            raise StreamExhausted(
                f"prefix of {n} bits requested but {self.path} holds {self.limit} bits"
            )
        joined = "".join(format(b, "08b") for b in self._data[: (n + 7) // 8])
        return BitString(joined[:n])


# --- rule streams -----------------------------------------------------------

# Fixed-point digit extraction: positions are safe while the accumulated
# floor error (< ~8*(n + 33) units in the last place) stays far below the
# 4 digit bits; with 128 guard bits that holds comfortably to 10^5.
BBP_GUARD_BITS = 128
BBP_MAX_POSITION = 100_000


@lru_cache(maxsize=None)
def bbp_hex_digit(n: int) -> int:
    """n-th hexadecimal digit (1-based) of pi's fractional part.

    Uses the 16^-k digit-extraction series with exact integer arithmetic:
    the head of each partial sum is evaluated with modular exponentiation,
    the tail in 128-bit fixed point.
    """
    if n < 1:
        raise ValueError("digit positions start at 1")
    if n > BBP_MAX_POSITION:
        raise PrecisionRange(
            f"digit {n} beyond the precision-safe range (<= {BBP_MAX_POSITION})"
        )
    scale = 1 << BBP_GUARD_BITS
    total = 0
    for coef, j in ((4, 1), (-2, 4), (-1, 5), (-1, 6)):
        part = 0
        for k in range(n):
            m = 8 * k + j
            part += (pow(16, n - 1 - k, m) << BBP_GUARD_BITS) // m
        k = n
        while True:
            term = scale // ((8 * k + j) << (4 * (k - n + 1)))
            if term == 0:
                break
            part += term
            k += 1
        total += coef * part
    return (total % scale) >> (BBP_GUARD_BITS - 4)


_PRIMES = [2, 3, 5, 7, 11, 13]


def nth_prime(j: int) -> int:
    """j-th prime, 1-based (p_1 = 2); trial division over cached primes."""
    if j < 1:
        raise ValueError("prime indices start at 1")
    candidate = _PRIMES[-1]
    while len(_PRIMES) < j:
        candidate += 2
        limit = int(candidate**0.5)
        for p in _PRIMES:
            if p > limit:
                _PRIMES.append(candidate)
                break
            if candidate % p == 0:
                break
    return _PRIMES[j - 1]


def _champernowne_locate(j: int) -> tuple[int, int, int]:
    # cumulative bits of numerals with <= b binary digits: (b-1)*2^b + 1
    b = 1
    while (b - 1) * (1 << b) + 1 < j:
        b += 1
    before = (b - 2) * (1 << (b - 1)) + 1 if b > 1 else 0
    offset = j - before - 1
    return b, offset // b, offset % b


@dataclass(frozen=True)
class ChampernowneBinaryStream(BitStream):
    """Concatenation of the binary numerals 1, 10, 11, 100, ..."""

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        width, index, pos = _champernowne_locate(j)
        numeral = (1 << (width - 1)) + index
        return (numeral >> (width - 1 - pos)) & 1

    def prefix(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        pieces, length = [], 0
        for i in itertools.count(1):
            if length >= n:
                break
            piece = format(i, "b")
            pieces.append(piece)
            length += len(piece)
        return BitString("".join(pieces)[:n])


@dataclass(frozen=True)
class PiBinaryStream(BitStream):
    """Binary expansion of pi's fractional part (4 bits per hex digit)."""

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        digit = bbp_hex_digit((j + 3) // 4)
        return (digit >> (3 - (j - 1) % 4)) & 1


@dataclass(frozen=True)
class PiPrimeIndexStream(BitStream):
    """pi's binary-fraction bits sampled at the prime positions 2,3,5,7,..."""

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        return PiBinaryStream().bit(nth_prime(j))


@dataclass(frozen=True)
class ConstantStream(BitStream):
    value: int = 0

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError("constant stream bit must be 0 or 1")

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        return self.value

    def prefix(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("prefix length must be >= 0")
        return BitString(str(self.value) * n)


@dataclass(frozen=True)
class AlternatingStream(BitStream):
    """0, 1, 0, 1, ..."""

    def bit(self, j: int) -> int:
        if j < 1:
            raise IndexError("bit positions start at 1")
        return (j - 1) % 2

    def prefix(self, n: int) -> BitString:
        return PeriodicStream(cycle="01").prefix(n)


RULE_IDS = (
    "champernowne-binary",
    "pi-binary",
    "pi-prime-index",
    "constant",
    "alternating",
)


def make_rule_stream(rule_id: str, **params) -> BitStream:
    """Build one of the named computable reference streams."""
    if rule_id == "champernowne-binary":
        return ChampernowneBinaryStream()
    if rule_id == "pi-binary":
        return PiBinaryStream()
    if rule_id == "pi-prime-index":
        return PiPrimeIndexStream()
    if rule_id == "constant":
        return ConstantStream(params.get("bit", 0))
    if rule_id == "alternating":
        return AlternatingStream()
    raise UnknownRule(f"no rule stream named {rule_id!r} (known: {', '.join(RULE_IDS)})")


def make_seeded_noise_stream(seed: int) -> SeededNoiseStream:
    return SeededNoiseStream(seed & _MASK64)


def periodic_stream(head: str = "", cycle: str = "0") -> PeriodicStream:
    return PeriodicStream(str(head), str(cycle))


def file_stream(path, total_bits: int | None = None) -> FileStream:
    return FileStream(str(path), total_bits)


def fresh_noise_seeds(base_seed: int):
    """Per-trial seed derivation: trial i gets splitmix64 output i of base."""

    def source(i: int) -> SeededNoiseStream:
        return SeededNoiseStream(splitmix64_value(base_seed, i))

    return source
