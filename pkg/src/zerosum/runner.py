"""Scenario orchestration: stimulus -> slice netlist -> transient -> metrics.

Each scenario is a set of independent "cells" (one architecture/pattern/rate
combination on one bus layout).  Cells are deterministic given the scenario
seed and may be solved in parallel.
"""

from __future__ import annotations

import ast
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .codec import SchemeKind, traces_required, usable_bits
from .errors import ConfigError
from .analysis import (
    SliceSummary,
    default_settle_time,
    differential_eye,
    fold_eye,
    measure_eye,
    rail_ripple,
    summarize,
)
from .netlist import C_LIGHT
from .slices import INCH, LinkParams, SliceConfig, build_slice_netlist
from .solver import TransientConfig, WaveformSet, default_time_step, transient
from .stimulus import LaneBitstreams, PatternSpec, generate_patterns, to_drive_waveforms

RATE_SWEEP_GBPS = (0.233, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
DISPARITY_SWEEP = (0, 2, 4, 8, 16)
BUS_LAYOUTS = ("1x36", "2x20", "4x12")
# analysis window: UIs measured after the settle window.  Typical traffic
# needs well over one full PRBS7 period (127 UI) for a representative eye;
# worst-case patterns are periodic and settle much sooner.
ANALYSIS_UIS = {"typical": 224, "worst": 96}


@dataclass(frozen=True)
class ScenarioConfig:
    """Runner knobs; field names double as the config-file key names."""

    out_dir: str = "out"
    seed: int = 1
    jobs: int = 1
    rate_gbps: float = 16.0
    words: Optional[int] = None  # None -> settle window + ANALYSIS_UIS
    data_bits: int = 32
    identical_links: bool = False
    signals_per_pg: int = 4
    rise_fall_ui: float = 0.25
    rise_fall_s: Optional[float] = None  # absolute edge time, overrides the fraction
    edge_shape: str = "raised_cosine"
    rates_gbps: Tuple[float, ...] = RATE_SWEEP_GBPS
    disparities: Tuple[int, ...] = DISPARITY_SWEEP
    layouts: Tuple[str, ...] = BUS_LAYOUTS

    def __post_init__(self) -> None:
        if self.seed < 0 or self.jobs < 1:
            raise ConfigError("seed must be >= 0 and jobs >= 1")
        if self.rate_gbps <= 0 or any(r <= 0 for r in self.rates_gbps):
            raise ConfigError("data rates must be positive")
        if not 0.0 < self.rise_fall_ui < 1.0:
            raise ConfigError("rise_fall_ui must be a fraction of the UI in (0, 1)")
        if self.rise_fall_s is not None and self.rise_fall_s <= 0:
            raise ConfigError("rise_fall_s must be positive when set")
        if self.words is not None and self.words < 1:
            raise ConfigError("words must be positive")


def load_scenario_config(path: Union[str, Path], **overrides) -> ScenarioConfig:
    """Parse `key = value` lines; keys must exactly match ScenarioConfig fields."""

    known = {f.name for f in fields(ScenarioConfig)}
    values: Dict[str, object] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in known:
            raise ConfigError(f"{path}:{ln}: unknown config key {key!r}")
        try:
            values[key] = ast.literal_eval(val)
        except (ValueError, SyntaxError):
            values[key] = val  # bare strings (e.g. out_dir = results)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**values)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    arch: str
    pattern: str
    rate_gbps: float
    disparity: int
    group_layout: str
    lane: int
    eye_mv: float
    ripple_mv_pp: float


@dataclass
class CellResult:
    """Metrics of one solved cell, plus the raw artifacts the report renders."""

    name: str
    rows: List[ResultRow]
    summary: SliceSummary
    eye_clouds: List[Tuple[np.ndarray, np.ndarray]]  # per measured lane
    ui: float
    waveforms: WaveformSet
    plane_current_pp: float
    plane_current_mean: float


def parse_layout(layout: str) -> Tuple[int, int]:
    """'2x20' -> (2 groups, 20 wires each)."""

    try:
        groups, wires = (int(p) for p in layout.lower().split("x"))
    except ValueError:
        raise ConfigError(f"bus layout must look like '2x20', got {layout!r}") from None
    if groups < 1 or wires < 1:
        raise ConfigError(f"bus layout must be positive, got {layout!r}")
    return groups, wires


def check_layout_capacity(layout: str, disparity: int, data_bits: int) -> None:
    groups, wires = parse_layout(layout)
    per_group = usable_bits(wires, disparity)
    if groups * per_group < data_bits:
        raise ConfigError(
            f"layout {layout} at disparity {disparity} carries "
            f"{groups * per_group} bits < {data_bits} required"
        )


def _group_seed(seed: int, group: int) -> int:
    return seed + 101 * group


def build_cell_streams(
    arch: SchemeKind,
    mode: str,
    layout: str,
    words: int,
    seed: int,
) -> LaneBitstreams:
    """Bitstreams for one cell; ZS group layouts get one independent code
    group per layout group, stacked in lane order."""

    groups, wires = parse_layout(layout)
    if arch.kind != "ZS" or groups == 1:
        lanes = groups * wires
        return generate_patterns(PatternSpec(arch, mode, lanes, words, seed=seed))
    parts = [
        generate_patterns(PatternSpec(arch, mode, wires, words, seed=_group_seed(seed, g)))
        for g in range(groups)
    ]
    bits = np.vstack([p.bits for p in parts])
    labels = tuple(lbl for p in parts for lbl in p.labels)
    return LaneBitstreams(bits=bits, labels=labels, arch=arch, mode=mode, seed=seed)


def default_words(
    rate: float, mode: str = "typical", max_len_in: float = 4.02, eps_eff: float = 4.0
) -> int:
    """Enough words to cover the settle window plus the analysis window."""

    ui = 1.0 / rate
    delay = max_len_in * INCH * math.sqrt(eps_eff) / C_LIGHT
    settle = default_settle_time(ui, delay)
    return int(math.ceil(settle / ui)) + ANALYSIS_UIS.get(mode, ANALYSIS_UIS["typical"])


@dataclass(frozen=True)
class CellSpec:
    """One solvable scenario cell; picklable for process-pool dispatch."""

    scenario: str
    name: str
    arch: SchemeKind
    mode: str
    layout: str
    rate: float
    seed: int
    words: Optional[int] = None
    identical_links: bool = False
    signals_per_pg: int = 4
    rise_fall_ui: float = 0.25
    edge_shape: str = "raised_cosine"
    # absolute 20-80% edge time; overrides the UI fraction when set (the rate
    # sweep keeps the buffer's edge speed fixed while the UI stretches)
    rise_fall_s: Optional[float] = None


def run_cell(spec: CellSpec) -> CellResult:
    """Solve one cell and reduce it to per-lane rows and eye clouds."""

    groups, wires = parse_layout(spec.layout)
    lanes = groups * wires
    rate = spec.rate
    ui = 1.0 / rate
    words = spec.words if spec.words is not None else default_words(rate, spec.mode)

    rise_fall = spec.rise_fall_s if spec.rise_fall_s is not None else spec.rise_fall_ui * ui
    streams = build_cell_streams(spec.arch, spec.mode, spec.layout, words, spec.seed)
    waves = to_drive_waveforms(streams, rate, rise_fall=rise_fall, shape=spec.edge_shape)
    link = LinkParams(seed=_group_seed(spec.seed, 997), identical=spec.identical_links)
    slice_cfg = SliceConfig(arch=spec.arch, lanes=lanes, link=link)
    if spec.signals_per_pg != 4:
        from .slices import PinfieldConfig

        slice_cfg = replace(
            slice_cfg, pinfield=PinfieldConfig.default(lanes, spec.signals_per_pg)
        )
    built = build_slice_netlist(slice_cfg, waves)

    dt = default_time_step(rate, rise_fall)
    settle = default_settle_time(ui, float(built.line_delays.max()))
    ws = transient(
        built.netlist,
        TransientConfig(dt=dt, t_stop=words * ui, settle_time=settle),
    )

    rows: List[ResultRow] = []
    clouds: List[Tuple[np.ndarray, np.ndarray]] = []
    eyes: List = []
    rx = built.lane_labels["rx"]
    cv, dv = built.lane_labels["c"], built.lane_labels["d"]
    if spec.arch.kind == "DIFF":
        measured = [(p // 2, p, p + 1) for p in range(0, lanes, 2)]
    else:
        measured = [(k, k, None) for k in range(lanes)]
    for lane_id, k, comp in measured:
        phase = float(built.line_delays[k])
        if comp is None:
            m = measure_eye(ws.t, ws[rx[k]], ui, lane_id, phase, settle)
            eye = m.vertical_opening
            tf, vf = fold_eye(ws.t, ws[rx[k]], ui, phase, settle)
        else:
            d = differential_eye(ws.t, ws[rx[k]], ws[rx[comp]], ui, lane_id, phase, settle)
            m = d.metrics
            eye = d.full
            tf, vf = fold_eye(ws.t, ws[rx[k]] - ws[rx[comp]], ui, phase, settle)
        rip = rail_ripple(ws.t, ws[cv[k]], ws[dv[k]], 1.0, settle)
        eyes.append(m)
        clouds.append((tf, vf))
        rows.append(
            ResultRow(
                scenario=spec.scenario,
                arch=str(spec.arch),
                pattern=spec.mode,
                rate_gbps=rate / 1e9,
                disparity=spec.arch.disparity if spec.arch.kind == "ZS" else 0,
                group_layout=spec.layout,
                lane=lane_id,
                eye_mv=eye * 1e3,
                ripple_mv_pp=rip.peak_to_peak * 1e3,
            )
        )

    keep = ws.t >= settle
    plane = ws["i_vdd_plane"][keep]
    return CellResult(
        name=spec.name,
        rows=rows,
        summary=summarize(eyes),
        eye_clouds=clouds,
        ui=ui,
        waveforms=ws,
        plane_current_pp=float(plane.max() - plane.min()),
        plane_current_mean=float(plane.mean()),
    )


def run_cells(specs: Sequence[CellSpec], jobs: int = 1) -> List[CellResult]:
    if jobs <= 1 or len(specs) <= 1:
        return [run_cell(s) for s in specs]
    with ProcessPoolExecutor(max_workers=min(jobs, len(specs))) as pool:
        return list(pool.map(run_cell, specs))


# ---------------------------------------------------------------------------
# scenario cell lists
# ---------------------------------------------------------------------------


def _common(cfg: ScenarioConfig) -> Dict[str, object]:
    return dict(
        identical_links=cfg.identical_links,
        signals_per_pg=cfg.signals_per_pg,
        rise_fall_ui=cfg.rise_fall_ui,
        rise_fall_s=cfg.rise_fall_s,
        edge_shape=cfg.edge_shape,
        words=cfg.words,
        seed=cfg.seed,
    )


def baseline_cells(cfg: ScenarioConfig) -> List[CellSpec]:
    """3 architectures x {worst, typical} at one rate, paper bus sizes."""

    rate = cfg.rate_gbps * 1e9
    cells = []
    for arch in (SchemeKind.se(), SchemeKind.diff(), SchemeKind.zs(0)):
        lanes = traces_required(cfg.data_bits, arch)
        for mode in ("worst", "typical"):
            cells.append(
                CellSpec(
                    scenario="baseline",
                    name=f"{arch.kind.lower()}_{mode}",
                    arch=arch,
                    mode=mode,
                    layout=f"1x{lanes}",
                    rate=rate,
                    **_common(cfg),
                )
            )
    return cells


def disparity_sweep_cells(cfg: ScenarioConfig) -> List[CellSpec]:
    """ZS typical eyes vs disparity bound; 36 wires at d=0, 34 at d>=2."""

    rate = cfg.rate_gbps * 1e9
    cells = []
    for d in cfg.disparities:
        arch = SchemeKind.zs(d)
        wires = 36 if d == 0 else 34
        check_layout_capacity(f"1x{wires}", d, cfg.data_bits)
        cells.append(
            CellSpec(
                scenario="disparity-sweep",
                name=f"zs_d{d}_{wires}w",
                arch=arch,
                mode="typical",
                layout=f"1x{wires}",
                rate=rate,
                **_common(cfg),
            )
        )
    return cells


def bus_size_cells(cfg: ScenarioConfig) -> List[CellSpec]:
    """ZS+-0 typical eyes across group layouts carrying the same payload."""

    rate = cfg.rate_gbps * 1e9
    cells = []
    for layout in cfg.layouts:
        check_layout_capacity(layout, 0, cfg.data_bits)
        cells.append(
            CellSpec(
                scenario="bus-size",
                name=f"zs_{layout}",
                arch=SchemeKind.zs(0),
                mode="typical",
                layout=layout,
                rate=rate,
                **_common(cfg),
            )
        )
    return cells


def rate_sweep_cells(cfg: ScenarioConfig) -> List[CellSpec]:
    """Worst-case eyes vs data rate for all three architectures."""

    cells = []
    for gbps in cfg.rates_gbps:
        for arch in (SchemeKind.se(), SchemeKind.diff(), SchemeKind.zs(0)):
            lanes = traces_required(cfg.data_bits, arch)
            cells.append(
                CellSpec(
                    scenario="rate-sweep",
                    name=f"{arch.kind.lower()}_{gbps:g}gbps",
                    arch=arch,
                    mode="worst",
                    layout=f"1x{lanes}",
                    rate=gbps * 1e9,
                    **_common(cfg),
                )
            )
    return cells


def run_scenario(name: str, cfg: ScenarioConfig) -> List[CellResult]:
    builders = {
        "baseline": baseline_cells,
        "disparity-sweep": disparity_sweep_cells,
        "bus-size": bus_size_cells,
        "rate-sweep": rate_sweep_cells,
    }
    if name not in builders:
        raise ConfigError(f"unknown scenario {name!r}")
    return run_cells(builders[name](cfg), jobs=cfg.jobs)
