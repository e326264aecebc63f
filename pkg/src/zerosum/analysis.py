"""Waveform reduction: eye folding, vertical eye opening, rail ripple, and
slice summaries."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError

# Voltage span below which an aperture window is treated as single-railed.
_DEGENERATE_SPAN = 1e-9


@dataclass(frozen=True)
class EyeMetrics:
    lane: int
    vertical_opening: float  # volts, clamped at 0
    sample_count: int
    ui: float
    aperture: float
    both_symbols_present: bool = True


@dataclass(frozen=True)
class RippleMetrics:
    peak_to_peak: float
    max_excursion_from_nominal: float
    node_pair: str = "c-d"


@dataclass(frozen=True)
class SliceSummary:
    min: float
    mean: float
    max: float


@dataclass(frozen=True)
class DifferentialEye:
    full: float  # opening of (true - comp)
    halved: float  # full/2, for cross-architecture plots
    metrics: EyeMetrics


def default_settle_time(ui: float, line_delay: float) -> float:
    """Discard window: 8 UI of pattern start-up plus two line flights."""

    return 8.0 * ui + 2.0 * line_delay


def fold_eye(
    t: np.ndarray,
    v: np.ndarray,
    ui: float,
    phase_offset: float = 0.0,
    settle_time: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Fold samples after settle_time modulo one UI.

    phase_offset shifts the fold so bit centers land at UI/2 (pass the lane's
    arrival delay); shifting by an exact UI is a no-op.
    """

    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.shape != v.shape:
        raise DomainError("time and voltage arrays must have the same shape")
    if t[-1] - settle_time < 16.0 * ui:
        raise DomainError(
            f"record too short: need at least 16 UI after settle "
            f"({t[-1] - settle_time:g} s available, UI {ui:g} s)"
        )
    keep = t >= settle_time
    tf = np.mod(t[keep] - phase_offset, ui)
    return tf, v[keep]


@dataclass(frozen=True)
class EyeMeasurement:
    opening: float
    both_symbols_present: bool
    sample_count: int


def vertical_eye_opening(
    t_fold: np.ndarray,
    v_fold: np.ndarray,
    ui: float,
    aperture: float = 0.1,
) -> EyeMeasurement:
    """Vertical opening inside the center aperture window.

    Samples are split at the window's voltage midpoint into upper/lower rails;
    opening = min(upper) - max(lower), clamped at 0.  A window whose samples
    span (numerically) a single level reports 0 with both_symbols_present
    False, so sweeps over closed eyes complete.
    """

    if not 0.0 < aperture <= 0.5:
        raise DomainError(f"aperture must be in (0, 0.5], got {aperture}")
    half = 0.5 * aperture * ui
    win = np.abs(np.asarray(t_fold) - 0.5 * ui) <= half
    volts = np.asarray(v_fold)[win]
    if volts.size == 0:
        raise DomainError("aperture window contains no samples")
    lo, hi = float(volts.min()), float(volts.max())
    if hi - lo < _DEGENERATE_SPAN:
        return EyeMeasurement(0.0, False, int(volts.size))
    mid = 0.5 * (lo + hi)
    upper = volts[volts >= mid]
    lower = volts[volts < mid]
    opening = max(0.0, float(upper.min()) - float(lower.max()))
    return EyeMeasurement(opening, True, int(volts.size))


def measure_eye(
    t: np.ndarray,
    v: np.ndarray,
    ui: float,
    lane: int = 0,
    phase_offset: float = 0.0,
    settle_time: float = 0.0,
    aperture: float = 0.1,
) -> EyeMetrics:
    """fold_eye + vertical_eye_opening in one step, tagged with the lane id."""

    tf, vf = fold_eye(t, v, ui, phase_offset, settle_time)
    m = vertical_eye_opening(tf, vf, ui, aperture)
    return EyeMetrics(
        lane=lane,
        vertical_opening=m.opening,
        sample_count=m.sample_count,
        ui=ui,
        aperture=aperture,
        both_symbols_present=m.both_symbols_present,
    )


def differential_eye(
    t: np.ndarray,
    v_true: np.ndarray,
    v_comp: np.ndarray,
    ui: float,
    lane: int = 0,
    phase_offset: float = 0.0,
    settle_time: float = 0.0,
    aperture: float = 0.1,
) -> DifferentialEye:
    """Opening of the (true - complement) waveform; ideally 2x single-ended."""

    v_true = np.asarray(v_true)
    v_comp = np.asarray(v_comp)
    if v_true.shape != v_comp.shape or v_true.shape != np.asarray(t).shape:
        raise DomainError("true/complement waveforms must share one sampling grid")
    m = measure_eye(t, v_true - v_comp, ui, lane, phase_offset, settle_time, aperture)
    return DifferentialEye(full=m.vertical_opening, halved=0.5 * m.vertical_opening, metrics=m)


def rail_ripple(
    t: np.ndarray,
    vdd: np.ndarray,
    vss: np.ndarray,
    nominal: float = 1.0,
    settle_time: float = 0.0,
    node_pair: str = "c-d",
) -> RippleMetrics:
    """Peak-to-peak and max excursion of (vdd - vss - nominal) after settle."""

    t = np.asarray(t)
    vdd = np.asarray(vdd)
    vss = np.asarray(vss)
    if vdd.shape != vss.shape or vdd.shape != t.shape:
        raise DomainError("rail waveforms must share one sampling grid")
    keep = t >= settle_time
    diff = vdd[keep] - vss[keep] - nominal
    if diff.size == 0:
        raise DomainError("no samples after settle_time")
    return RippleMetrics(
        peak_to_peak=float(diff.max() - diff.min()),
        max_excursion_from_nominal=float(np.max(np.abs(diff))),
        node_pair=node_pair,
    )


def summarize(metrics: Sequence[EyeMetrics]) -> SliceSummary:
    """Exact min/mean/max of the per-lane vertical openings."""

    if not metrics:
        raise DomainError("cannot summarize an empty metrics list")
    openings = [m.vertical_opening for m in metrics]
    return SliceSummary(
        min=float(np.min(openings)),
        mean=float(np.mean(openings)),
        max=float(np.max(openings)),
    )


def export_eye_cloud(
    t_fold: np.ndarray, v_fold: np.ndarray, ui: float, path: Union[str, Path]
) -> None:
    """Per-lane eye scatter as CSV rows of (time_frac, voltage)."""

    with Path(path).open("w") as fh:
        fh.write("time_frac,voltage\n")
        for tf, vf in zip(np.asarray(t_fold) / ui, np.asarray(v_fold)):
            fh.write(f"{tf:.6f},{vf:.8e}\n")
