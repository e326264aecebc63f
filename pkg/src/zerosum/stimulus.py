"""Per-lane bit pattern generation and ideal drive waveforms.

"Worst case" patterns force maximal simultaneous switching stress; "typical"
patterns use staggered PRBS7 streams (SE/DIFF) or random valid code words
(ZS).  All lanes are clocked synchronously: every transition is time-aligned
across the bus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .codec import CodeBook, SchemeKind, sample_codeword_values
from .errors import ConfigError, DomainError

# Fraction of the full 0-100% edge covered by the 20-80% window, per shape.
_EDGE_2080_FRACTION = {
    "linear": 0.6,
    "raised_cosine": (math.acos(-0.6) - math.acos(0.6)) / math.pi,
}


def prbs7_stream(seed: int, length: int) -> np.ndarray:
    """Maximal-length PRBS7 (x^7 + x^6 + 1), period 127, as a 0/1 array.

    The seed is the 7-bit initial LFSR state; 0 is the lockup state and is
    rejected.
    """

    if not 0 < seed < 128:
        raise DomainError(f"PRBS7 seed must be a nonzero 7-bit state, got {seed}")
    state = seed
    bits = np.empty(length, dtype=np.uint8)
    for i in range(length):
        bits[i] = state & 1
        newbit = ((state >> 6) ^ (state >> 5)) & 1
        state = ((state << 1) | newbit) & 0x7F
    return bits


@dataclass(frozen=True)
class PatternSpec:
    """What to generate: architecture, stress mode, bus size, and seeding."""

    arch: SchemeKind
    mode: str  # "worst" | "typical"
    lanes: int
    words: int
    seed: int = 0
    book: Optional[CodeBook] = None

    def __post_init__(self) -> None:
        if self.mode not in ("worst", "typical"):
            raise ConfigError(f"pattern mode must be 'worst' or 'typical', got {self.mode!r}")
        if self.lanes < 1 or self.words < 1:
            raise ConfigError("lanes and words must be positive")
        if self.arch.kind == "DIFF" and self.lanes % 2 != 0:
            raise ConfigError("DIFF requires an even lane count (true/complement pairs)")
        if self.book is not None and self.arch.kind == "ZS" and self.lanes != self.book.width:
            raise ConfigError(
                f"ZS lane count {self.lanes} must equal codebook width {self.book.width}"
            )


@dataclass(frozen=True)
class LaneBitstreams:
    """lanes x words bit matrix with per-lane roles."""

    bits: np.ndarray  # shape (lanes, words), uint8
    labels: tuple  # per lane: "single" | "true" | "comp"
    arch: SchemeKind
    mode: str
    seed: int
    rate: Optional[float] = None  # bits/second, set when waveforms are built

    @property
    def lanes(self) -> int:
        return self.bits.shape[0]

    @property
    def words(self) -> int:
        return self.bits.shape[1]

    def column_disparities(self) -> np.ndarray:
        ones = self.bits.sum(axis=0).astype(int)
        return 2 * ones - self.lanes


def _toggle(words: int, start: int = 1) -> np.ndarray:
    bits = np.empty(words, dtype=np.uint8)
    bits[0::2] = start
    bits[1::2] = 1 - start
    return bits


def worst_case_patterns(spec: PatternSpec) -> LaneBitstreams:
    """Maximal-di/dt stress patterns.

    SE/DIFF: every (true) lane carries the lockstep toggle 1,0,1,0,...
    ZS: the two contiguous bus halves toggle in anti-phase, so each word is
    globally balanced but each half switches in unison.
    """

    if spec.mode != "worst":
        raise ConfigError("worst_case_patterns requires mode='worst'")
    toggle = _toggle(spec.words)
    if spec.arch.kind == "SE":
        bits = np.tile(toggle, (spec.lanes, 1))
        labels = ("single",) * spec.lanes
    elif spec.arch.kind == "DIFF":
        bits = np.empty((spec.lanes, spec.words), dtype=np.uint8)
        bits[0::2] = toggle
        bits[1::2] = 1 - toggle
        labels = ("true", "comp") * (spec.lanes // 2)
    else:  # ZS
        if spec.lanes % 2 != 0:
            raise ConfigError("ZS worst-case patterns require an even lane count")
        half = spec.lanes // 2
        bits = np.empty((spec.lanes, spec.words), dtype=np.uint8)
        bits[:half] = toggle
        bits[half:] = 1 - toggle
        labels = ("single",) * spec.lanes
    return LaneBitstreams(bits=bits, labels=labels, arch=spec.arch, mode=spec.mode, seed=spec.seed)


def _lane_prbs_seed(seed: int, lane_index: int) -> int:
    # mod 127 then +1 maps into 1..127, away from the LFSR lockup state 0
    return ((seed + lane_index) % 127) + 1


def typical_patterns(spec: PatternSpec) -> LaneBitstreams:
    """Nominal traffic: staggered PRBS7 per lane (SE/DIFF) or uniformly drawn
    valid ZS code words per bus word.

    ZS draws table entries when a codebook is supplied; without one, valid
    words are rejection-sampled directly at the scheme's disparity bound
    (the lookup table becomes impractical above ~16 data bits).
    """

    if spec.mode != "typical":
        raise ConfigError("typical_patterns requires mode='typical'")
    if spec.arch.kind == "SE":
        bits = np.vstack(
            [prbs7_stream(_lane_prbs_seed(spec.seed, i), spec.words) for i in range(spec.lanes)]
        )
        labels = ("single",) * spec.lanes
    elif spec.arch.kind == "DIFF":
        bits = np.empty((spec.lanes, spec.words), dtype=np.uint8)
        for i in range(0, spec.lanes, 2):
            true = prbs7_stream(_lane_prbs_seed(spec.seed, i), spec.words)
            bits[i] = true
            bits[i + 1] = 1 - true
        labels = ("true", "comp") * (spec.lanes // 2)
    else:  # ZS
        if spec.book is not None:
            rng = np.random.default_rng(spec.seed)
            idx = rng.integers(0, len(spec.book), size=spec.words)
            values = spec.book.values()[idx]
            width = spec.book.width
        else:
            values = np.array(
                sample_codeword_values(
                    spec.lanes, spec.arch.disparity, spec.words, spec.seed, distinct=False
                ),
                dtype=np.int64,
            )
            width = spec.lanes
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        bits = ((values[None, :] >> shifts[:, None]) & 1).astype(np.uint8)
        labels = ("single",) * spec.lanes
    return LaneBitstreams(bits=bits, labels=labels, arch=spec.arch, mode=spec.mode, seed=spec.seed)


def generate_patterns(spec: PatternSpec) -> LaneBitstreams:
    if spec.mode == "worst":
        return worst_case_patterns(spec)
    return typical_patterns(spec)


@dataclass(frozen=True)
class DriveWaveform:
    """Normalized 0-to-1 drive level vs. time for one lane.

    Bit k occupies [k*ui, (k+1)*ui); transitions are centered on bit
    boundaries.  rise_fall is the 20-80% edge time; the level before t=0 is
    bits[0] (no start-up edge).
    """

    bits: np.ndarray
    unit_interval: float
    rise_fall: float
    shape: str = "raised_cosine"

    def __post_init__(self) -> None:
        if self.shape not in _EDGE_2080_FRACTION:
            raise ConfigError(f"unknown edge shape {self.shape!r}")
        if self.rise_fall <= 0 or self.unit_interval <= 0:
            raise DomainError("rise_fall and unit_interval must be positive")
        if self.rise_fall >= self.unit_interval:
            raise DomainError(
                f"rise/fall {self.rise_fall:g} s must be shorter than the unit "
                f"interval {self.unit_interval:g} s"
            )
        if self.full_edge_time > self.unit_interval:
            raise DomainError(
                "full 0-100% edge exceeds one unit interval; shorten rise_fall"
            )

    @property
    def full_edge_time(self) -> float:
        return self.rise_fall / _EDGE_2080_FRACTION[self.shape]

    @property
    def duration(self) -> float:
        return len(self.bits) * self.unit_interval

    def level(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """Evaluate the normalized drive level at time(s) t."""

        t = np.asarray(t, dtype=float)
        bits = np.asarray(self.bits, dtype=float)
        n = len(bits)
        u = t / self.unit_interval
        k = np.rint(u).astype(np.int64)  # nearest bit boundary index
        frac = u - k
        prev = bits[np.clip(k - 1, 0, n - 1)]
        nxt = bits[np.clip(k, 0, n - 1)]
        half = 0.5 * self.full_edge_time / self.unit_interval
        x = np.clip((frac + half) / (2.0 * half), 0.0, 1.0)
        if self.shape == "raised_cosine":
            s = 0.5 * (1.0 - np.cos(np.pi * x))
        else:
            s = x
        in_edge = np.abs(frac) <= half
        flat = np.where(frac > 0, nxt, prev)
        return np.where(in_edge, prev + (nxt - prev) * s, flat)


def to_drive_waveforms(
    streams: LaneBitstreams,
    rate: float,
    rise_fall: Optional[float] = None,
    shape: str = "raised_cosine",
) -> List[DriveWaveform]:
    """One DriveWaveform per lane at the given data rate.

    rise_fall defaults to 0.25 of the unit interval (20-80% convention); all
    lanes share edge timing (synchronous clocking).
    """

    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    ui = 1.0 / rate
    if rise_fall is None:
        rise_fall = 0.25 * ui
    if rise_fall >= ui:
        raise DomainError(f"rise/fall {rise_fall:g} s must be below the UI {ui:g} s")
    return [
        DriveWaveform(bits=streams.bits[i].copy(), unit_interval=ui, rise_fall=rise_fall, shape=shape)
        for i in range(streams.lanes)
    ]


def dump_patterns(streams: LaneBitstreams, path: Union[str, Path]) -> None:
    """Write one 0/1 line per lane with a '#' header."""

    lines = [
        f"# arch={streams.arch} mode={streams.mode} seed={streams.seed} "
        f"rate={streams.rate if streams.rate is not None else 'unset'}"
    ]
    for i in range(streams.lanes):
        lines.append("".join(str(int(b)) for b in streams.bits[i]))
    Path(path).write_text("\n".join(lines) + "\n")
