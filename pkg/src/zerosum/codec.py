"""Balanced / bounded-disparity code words: counting, enumeration, and a
lookup-table codec.

A bus of ``width`` traces carries one code word per unit interval.  The
disparity of a word is ``#ones - #zeros``; "zero sum" words are perfectly
balanced (disparity 0), "nearly zero sum" words keep ``|disparity|`` within an
even bound ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import CapacityError, ConfigError, DomainError, UnknownCodeWordError

# Full enumeration above this width is deliberately refused; use sampled
# codebook construction instead.
ENUMERATION_WIDTH_CAP = 24


@dataclass(frozen=True)
class DisparityBound:
    """Maximum allowed |#ones - #zeros| per code word.  Must be even and >= 0."""

    d: int

    def __post_init__(self) -> None:
        if self.d < 0:
            raise DomainError(f"disparity bound must be non-negative, got {self.d}")
        if self.d % 2 != 0:
            raise DomainError(
                f"disparity bound must be even (odd imbalance is impossible on an "
                f"even-width word), got {self.d}"
            )


def _as_bound(disparity: Union[int, DisparityBound]) -> int:
    if isinstance(disparity, DisparityBound):
        return disparity.d
    return DisparityBound(int(disparity)).d


@dataclass(frozen=True)
class CodeWord:
    """A fixed-width word, stored as an unsigned integer with MSB = trace 0."""

    width: int
    value: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.width % 2 != 0:
            raise DomainError(f"code word width must be positive and even, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise DomainError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "CodeWord":
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise DomainError(f"bits must be 0/1, got {b!r}")
            value = (value << 1) | b
        return cls(width=len(bits), value=value)

    @classmethod
    def from_string(cls, s: str) -> "CodeWord":
        return cls.from_bits([int(c) for c in s.strip()])

    @property
    def bits(self) -> Tuple[int, ...]:
        return tuple((self.value >> (self.width - 1 - i)) & 1 for i in range(self.width))

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")


def disparity(word: Union[CodeWord, Sequence[int]]) -> int:
    """#ones - #zeros of a word.  The all-ones word of width w maps to +w."""

    if isinstance(word, CodeWord):
        ones = word.value.bit_count()
        return 2 * ones - word.width
    bits = list(word)
    return 2 * sum(bits) - len(bits)


def _int_disparity(value: int, width: int) -> int:
    return 2 * value.bit_count() - width


def codes_with_offset(n_half: int, k: int) -> int:
    """Number of 2N-bit words with exactly N-k ones (equivalently N+k ones).

    Computed exactly as (2N)! / [(N-k)! (N+k)!]; no floating point.
    """

    if n_half <= 0:
        raise DomainError(f"n_half must be positive, got {n_half}")
    if not 0 <= k <= n_half:
        raise DomainError(f"offset k must satisfy 0 <= k <= {n_half}, got {k}")
    return math.comb(2 * n_half, n_half - k)


def total_codes(width: int, disparity_bound: Union[int, DisparityBound]) -> int:
    """Exact count of width-bit words with |disparity| <= bound."""

    d = _as_bound(disparity_bound)
    if width <= 0 or width % 2 != 0:
        raise DomainError(f"width must be positive and even, got {width}")
    if d > width:
        raise DomainError(f"disparity bound {d} exceeds width {width}")
    n = width // 2
    count = codes_with_offset(n, 0)
    for k in range(1, d // 2 + 1):
        count += 2 * codes_with_offset(n, k)
    return count


def effective_bits(traces: int, disparity_bound: Union[int, DisparityBound]) -> float:
    """Bits per word available on `traces` wires at the given disparity bound.

    log2 of the exact word count; the count itself never touches floats.
    """

    return math.log2(total_codes(traces, disparity_bound))


def usable_bits(traces: int, disparity_bound: Union[int, DisparityBound]) -> int:
    """Integer part of effective_bits: whole data bits the bus can carry."""

    # Compare exactly against powers of two rather than flooring the log,
    # which could round wrong near integer boundaries.
    count = total_codes(traces, disparity_bound)
    return count.bit_length() - 1


@dataclass(frozen=True)
class SchemeKind:
    """Signaling scheme: single-ended, quasi-differential, or zero sum."""

    kind: str  # "SE" | "DIFF" | "ZS"
    disparity: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("SE", "DIFF", "ZS"):
            raise ConfigError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "ZS":
            DisparityBound(self.disparity)
        elif self.disparity != 0:
            raise ConfigError(f"{self.kind} does not take a disparity bound")

    @classmethod
    def se(cls) -> "SchemeKind":
        return cls("SE")

    @classmethod
    def diff(cls) -> "SchemeKind":
        return cls("DIFF")

    @classmethod
    def zs(cls, disparity: int = 0) -> "SchemeKind":
        return cls("ZS", disparity)

    def __str__(self) -> str:
        if self.kind == "ZS":
            return f"ZS±{self.disparity}"
        return self.kind


def traces_required(data_bits: int, scheme: SchemeKind) -> int:
    """Trace count needed to carry `data_bits` per word with the given scheme.

    For ZS this is the smallest even trace count whose code space holds at
    least 2**data_bits words.
    """

    if data_bits < 1:
        raise DomainError(f"data_bits must be >= 1, got {data_bits}")
    if scheme.kind == "SE":
        return data_bits
    if scheme.kind == "DIFF":
        return 2 * data_bits
    need = 1 << data_bits
    traces = 2
    while True:
        if scheme.disparity <= traces and total_codes(traces, scheme.disparity) >= need:
            return traces
        traces += 2


def enumerate_codewords(
    width: int, disparity_bound: Union[int, DisparityBound]
) -> List[CodeWord]:
    """All width-bit words with |disparity| <= bound, ascending numeric order."""

    d = _as_bound(disparity_bound)
    if width <= 0 or width % 2 != 0:
        raise DomainError(f"width must be positive and even, got {width}")
    if d > width:
        raise DomainError(f"disparity bound {d} exceeds width {width}")
    if width > ENUMERATION_WIDTH_CAP:
        raise CapacityError(
            f"full enumeration capped at width {ENUMERATION_WIDTH_CAP} "
            f"(got {width}); use sampled codebook construction"
        )
    values = np.arange(1 << width, dtype=np.int64)
    ones = np.zeros(values.shape, dtype=np.int64)
    for i in range(width):
        ones += (values >> i) & 1
    keep = np.abs(2 * ones - width) <= d
    return [CodeWord(width, int(v)) for v in values[keep]]


@dataclass(frozen=True)
class CodeBook:
    """Lookup-table codec: data value i maps to table[i]."""

    data_bits: int
    width: int
    disparity_bound: int
    seed: int
    mode: str  # "enumerated" | "sampled"
    table: Tuple[CodeWord, ...]
    inverse: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.table) != 1 << self.data_bits:
            raise ConfigError(
                f"codebook table must hold 2^{self.data_bits} = "
                f"{1 << self.data_bits} words, got {len(self.table)}"
            )
        inv = {}
        for i, w in enumerate(self.table):
            if w.width != self.width:
                raise ConfigError(f"table entry {i} has width {w.width}, expected {self.width}")
            if abs(disparity(w)) > self.disparity_bound:
                raise ConfigError(
                    f"table entry {i} ({w}) violates disparity bound ±{self.disparity_bound}"
                )
            if w.value in inv:
                raise ConfigError(f"duplicate code word {w} at indices {inv[w.value]} and {i}")
            inv[w.value] = i
        object.__setattr__(self, "inverse", inv)

    def __len__(self) -> int:
        return len(self.table)

    def values(self) -> np.ndarray:
        """Table entries as an int64 array (width <= 62)."""

        return np.array([w.value for w in self.table], dtype=np.int64)


def build_codebook(
    data_bits: int,
    width: int,
    disparity_bound: Union[int, DisparityBound],
    seed: int = 0,
    mode: str = "enumerated",
) -> CodeBook:
    """Construct a codebook of 2**data_bits distinct valid code words.

    mode="enumerated" takes the numerically smallest valid words;
    mode="sampled" rejection-samples uniform random words with the seeded
    numpy PCG64 generator (deterministic per seed, portable across platforms).
    """

    d = _as_bound(disparity_bound)
    if data_bits < 1:
        raise DomainError(f"data_bits must be >= 1, got {data_bits}")
    need = 1 << data_bits
    available = total_codes(width, d)
    if need > available:
        raise CapacityError(
            f"{data_bits} data bits need {need} code words but only {available} "
            f"words of width {width} satisfy |disparity| <= {d}"
        )
    if mode == "enumerated":
        words = enumerate_codewords(width, d)[:need]
    elif mode == "sampled":
        words = [CodeWord(width, v) for v in sample_codeword_values(width, d, need, seed)]
    else:
        raise ConfigError(f"unknown codebook mode {mode!r}")
    return CodeBook(
        data_bits=data_bits,
        width=width,
        disparity_bound=d,
        seed=seed,
        mode=mode,
        table=tuple(words),
    )


def sample_codeword_values(
    width: int,
    disparity_bound: Union[int, DisparityBound],
    count: int,
    seed: int,
    distinct: bool = True,
) -> List[int]:
    """Rejection-sample valid code word values uniformly.

    Draws uniform width-bit integers and keeps those within the disparity
    bound; with distinct=True, duplicates are dropped (codebook construction),
    otherwise repeats are allowed (random word streams).
    """

    d = _as_bound(disparity_bound)
    if width > 62:
        raise DomainError(f"sampled construction supports width <= 62, got {width}")
    if count > total_codes(width, d) and distinct:
        raise CapacityError(f"cannot draw {count} distinct words of width {width}, d={d}")
    rng = np.random.default_rng(seed)
    out: List[int] = []
    seen = set()
    while len(out) < count:
        batch = rng.integers(0, 1 << width, size=max(256, count), dtype=np.uint64)
        for v in batch:
            v = int(v)
            if abs(_int_disparity(v, width)) > d:
                continue
            if distinct:
                if v in seen:
                    continue
                seen.add(v)
            out.append(v)
            if len(out) == count:
                break
    return out


def encode(book: CodeBook, data: int) -> CodeWord:
    """Map a data value to its code word."""

    if not 0 <= data < (1 << book.data_bits):
        raise DomainError(f"data value {data} out of range for {book.data_bits} bits")
    return book.table[data]


def decode(book: CodeBook, word: Union[CodeWord, int]) -> int:
    """Map a received code word back to its data value."""

    if isinstance(word, CodeWord):
        if word.width != book.width:
            raise DomainError(f"word width {word.width} != book width {book.width}")
        value = word.value
    else:
        value = int(word)
    try:
        return book.inverse[value]
    except KeyError:
        raise UnknownCodeWordError(
            f"word {format(value, f'0{book.width}b')} is not in the codebook "
            f"(corrupted or out-of-book)"
        ) from None


def save_codebook(book: CodeBook, path: Union[str, Path]) -> None:
    """Write a codebook as text: a header line, then one 0/1 word per line."""

    path = Path(path)
    lines = [f"{book.width},{book.data_bits},{book.disparity_bound},{book.mode},{book.seed}"]
    lines.extend(str(w) for w in book.table)
    path.write_text("\n".join(lines) + "\n")


def load_codebook(path: Union[str, Path]) -> CodeBook:
    """Read a codebook written by save_codebook, revalidating all invariants."""

    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty codebook file")
    head = lines[0].split(",")
    if len(head) != 5:
        raise ConfigError(f"{path}: bad header {lines[0]!r}")
    width, data_bits, d, mode, seed = (
        int(head[0]),
        int(head[1]),
        int(head[2]),
        head[3],
        int(head[4]),
    )
    words = []
    for i, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if len(line) != width or set(line) - {"0", "1"}:
            raise ConfigError(f"{path}:{i}: bad code word {line!r}")
        words.append(CodeWord.from_string(line))
    try:
        return CodeBook(
            data_bits=data_bits,
            width=width,
            disparity_bound=DisparityBound(d).d,
            seed=seed,
            mode=mode,
            table=tuple(words),
        )
    except (ConfigError, DomainError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
