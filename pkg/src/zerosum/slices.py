"""Builds the per-slice netlist: I/O cells on a shared on-die PDN, a via
pinfield to ideal board planes, and terminated PWB links.

Topology per lane: an ideal source at node 'i' stimulates a push-pull SST
driver referenced to the cell-local rails ('c' = local VDD, 'd' = local VSS);
the pad drives through the signal via and a lossy 50-ohm line to a receiver
terminated to mid-rail.  Each rail drops from its nearest power/ground via
(an inductor from the ideal board plane) through a two-segment R-L ladder to
the cell-local rail; the cell capacitance bridges the local rails and
adjacent cells share their rails through one more rail resistance each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .codec import SchemeKind
from .errors import ConfigError, DomainError
from .netlist import C_LIGHT, GROUND, HoldLevel, Netlist, via_inductance

INCH = 0.0254  # meters
MIL = 0.0254e-3


@dataclass(frozen=True)
class OnDiePdnParams:
    """On-chip rail parasitics; defaults model a deliberately weak PDN."""

    l_seg: float = 62e-12  # H, per rail segment
    c_cell: float = 0.012e-12  # F, per-cell rail-to-rail capacitance
    r_seg: float = 0.35  # ohm, per segment / backbone link

    def __post_init__(self) -> None:
        if self.l_seg <= 0 or self.c_cell <= 0 or self.r_seg <= 0:
            raise ConfigError("PDN parameters must all be positive")


@dataclass(frozen=True)
class SstBufferModel:
    """Behavioral source-series-terminated push-pull driver."""

    r_out: float = 50.0
    swing: float = 1.0  # rail-to-rail drive referenced to the local rails

    def __post_init__(self) -> None:
        if self.r_out <= 0:
            raise ConfigError("buffer r_out must be positive")


@dataclass(frozen=True)
class PinfieldConfig:
    """Via pinfield layout: pin roles in routing order plus via geometry."""

    signal_pins: int
    power_pins: int
    ground_pins: int
    assignment: Tuple[str, ...]  # per pin: "S" | "P" | "G"
    pitch_mm: float = 1.0
    via_length_mils: float = 100.0
    via_diameter_mils: float = 12.0

    def __post_init__(self) -> None:
        if min(self.signal_pins, self.power_pins, self.ground_pins) <= 0:
            raise ConfigError("pin counts must be positive")
        counts = {"S": 0, "P": 0, "G": 0}
        for role in self.assignment:
            if role not in counts:
                raise ConfigError(f"bad pin role {role!r}")
            counts[role] += 1
        if (counts["S"], counts["P"], counts["G"]) != (
            self.signal_pins,
            self.power_pins,
            self.ground_pins,
        ):
            raise ConfigError("pin assignment does not cover the stated counts exactly")

    @classmethod
    def default(
        cls,
        signal_pins: int,
        signals_per_pg: int = 4,
        via_length_mils: float = 100.0,
        via_diameter_mils: float = 12.0,
    ) -> "PinfieldConfig":
        """1:1:signals_per_pg power:ground:signal ratio, P/G interleaved evenly."""

        if signal_pins <= 0:
            raise ConfigError("signal_pins must be positive")
        n_units = math.ceil(signal_pins / signals_per_pg)
        roles: List[str] = []
        remaining = signal_pins
        for u in range(n_units):
            take = math.ceil(remaining / (n_units - u))
            roles.append("P")
            roles.extend(["S"] * (take // 2))
            roles.append("G")
            roles.extend(["S"] * (take - take // 2))
            remaining -= take
        return cls(
            signal_pins=signal_pins,
            power_pins=n_units,
            ground_pins=n_units,
            assignment=tuple(roles),
            via_length_mils=via_length_mils,
            via_diameter_mils=via_diameter_mils,
        )

    def via_l(self) -> float:
        return via_inductance(self.via_length_mils / 1000.0, self.via_diameter_mils / 1000.0)


@dataclass(frozen=True)
class LinkParams:
    """Per-lane PWB link variability ranges (lengths in inches)."""

    seed: int = 0
    len_range_in: Tuple[float, float] = (3.98, 4.02)
    r7_range: Tuple[float, float] = (49.0, 51.0)
    c2_range: Tuple[float, float] = (0.3e-12, 0.5e-12)
    pair_skew_limit_in: float = 0.020  # true-to-complement length mismatch bound
    identical: bool = False  # mid-range values on every lane (symmetry studies)

    def draw(self, lanes: int, diff_pairs: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-lane (length_in, r7, c2), deterministic for a given seed."""

        if self.identical:
            mid = lambda lo_hi: 0.5 * (lo_hi[0] + lo_hi[1])
            return (
                np.full(lanes, mid(self.len_range_in)),
                np.full(lanes, mid(self.r7_range)),
                np.full(lanes, mid(self.c2_range)),
            )
        rng = np.random.default_rng(self.seed)
        lengths = rng.uniform(*self.len_range_in, size=lanes)
        if diff_pairs:
            if lanes % 2:
                raise ConfigError("differential link draw needs an even lane count")
            for p in range(0, lanes, 2):
                skew = rng.uniform(-self.pair_skew_limit_in, self.pair_skew_limit_in)
                lengths[p + 1] = np.clip(lengths[p] + skew, *self.len_range_in)
        r7 = rng.uniform(*self.r7_range, size=lanes)
        c2 = rng.uniform(*self.c2_range, size=lanes)
        return lengths, r7, c2


@dataclass(frozen=True)
class SliceConfig:
    """Everything needed to build one slice."""

    arch: SchemeKind
    lanes: int
    pdn: OnDiePdnParams = OnDiePdnParams()
    buffer: SstBufferModel = SstBufferModel()
    link: LinkParams = LinkParams()
    pinfield: Optional[PinfieldConfig] = None
    z0_line: float = 50.0
    eps_eff: float = 4.0
    loss_per_inch: float = 2.0  # ohm/inch, lumped half at each line end
    vdd: float = 1.0
    vterm: float = 0.5


@dataclass
class BuiltSlice:
    """A built netlist plus the lane bookkeeping analysis needs."""

    netlist: Netlist
    config: SliceConfig
    pinfield: PinfieldConfig
    lane_labels: Dict[str, List[str]]  # "i" | "rx" | "c" | "d" -> per-lane probe labels
    line_delays: np.ndarray  # seconds, per lane
    lengths_in: np.ndarray
    r7: np.ndarray
    c2: np.ndarray
    vdd_current_label: str = "i_vdd_plane"


def build_slice_netlist(
    config: SliceConfig, waves: Optional[Sequence[object]] = None
) -> BuiltSlice:
    """Assemble the full slice netlist for the given architecture.

    `waves` supplies one normalized drive level per lane (objects with a
    .level(t) method); omitted lanes idle at a constant low level.
    """

    lanes = config.lanes
    pf = config.pinfield or PinfieldConfig.default(lanes)
    if pf.signal_pins != lanes:
        raise ConfigError(
            f"pinfield provides {pf.signal_pins} signal pins but the "
            f"{config.arch} slice has {lanes} lanes"
        )
    if waves is None:
        waves = [HoldLevel(0.0) for _ in range(lanes)]
    if len(waves) != lanes:
        raise ConfigError(f"got {len(waves)} drive waveforms for {lanes} lanes")

    lengths, r7, c2 = config.link.draw(lanes, diff_pairs=config.arch.kind == "DIFF")
    delays = lengths * INCH * math.sqrt(config.eps_eff) / C_LIGHT
    l_via = pf.via_l()

    nl = Netlist()
    nl.add_vsource("vsrc_vdd", "vddp", GROUND, volts=config.vdd)
    nl.add_vsource("vsrc_term", "vterm", GROUND, volts=config.vterm)
    nl.add_current_probe("i_vdd_plane", "vsrc_vdd")

    # power/ground via nodes per pinfield assignment
    p_pins = [p for p, role in enumerate(pf.assignment) if role == "P"]
    g_pins = [p for p, role in enumerate(pf.assignment) if role == "G"]
    for p in p_pins:
        nl.node(f"vp{p}")
        nl.add_series_rl(f"lvia_p{p}", "vddp", f"vp{p}", r=0.0, l=l_via)
    for p in g_pins:
        nl.node(f"vg{p}")
        nl.add_series_rl(f"lvia_g{p}", GROUND, f"vg{p}", r=0.0, l=l_via)

    def nearest(pin: int, cands: List[int]) -> int:
        return min(cands, key=lambda q: (abs(q - pin), q))

    labels: Dict[str, List[str]] = {"i": [], "rx": [], "c": [], "d": []}
    k = 0  # lane counter
    for p, role in enumerate(pf.assignment):
        if role != "S":
            continue

        i_n, pad, cv, cd = f"i{k:02d}", f"pad{k:02d}", f"c{k:02d}", f"d{k:02d}"
        midv, midg = f"mv{k:02d}", f"mg{k:02d}"
        p1, p2, rx = f"p1_{k:02d}", f"p2_{k:02d}", f"rx{k:02d}"

        nl.add_vsource(f"vi{k:02d}", i_n, GROUND, wave=waves[k], scale=config.buffer.swing)
        # two-segment R-L ladder from the nearest P/G via down to the cell rails
        vp = f"vp{nearest(p, p_pins)}"
        vg = f"vg{nearest(p, g_pins)}"
        nl.add_series_rl(f"lv1_{k:02d}", vp, midv, config.pdn.r_seg, config.pdn.l_seg)
        nl.add_series_rl(f"lv2_{k:02d}", midv, cv, config.pdn.r_seg, config.pdn.l_seg)
        nl.add_series_rl(f"lg1_{k:02d}", vg, midg, config.pdn.r_seg, config.pdn.l_seg)
        nl.add_series_rl(f"lg2_{k:02d}", midg, cd, config.pdn.r_seg, config.pdn.l_seg)
        if k:  # adjacent cells share their rails through one R_seg per rail
            nl.add_resistor(f"rcv{k:02d}", f"c{k - 1:02d}", cv, config.pdn.r_seg)
            nl.add_resistor(f"rcg{k:02d}", f"d{k - 1:02d}", cd, config.pdn.r_seg)
        nl.add_capacitor(f"ccell{k:02d}", cv, cd, config.pdn.c_cell)
        nl.add_driver(f"drv{k:02d}", cv, pad, cd, config.buffer.r_out, waves[k])

        loss_half = 0.5 * config.loss_per_inch * float(lengths[k])
        # signal via inductance and the near-end half of the line loss
        nl.add_series_rl(f"lvia_s{p}", pad, p1, r=loss_half, l=l_via)
        nl.add_tline(f"tl{k:02d}", p1, p2, config.z0_line, float(delays[k]))
        nl.add_resistor(f"rloss{k:02d}", p2, rx, loss_half)
        nl.add_resistor(f"rterm{k:02d}", rx, "vterm", float(r7[k]))
        nl.add_capacitor(f"cload{k:02d}", rx, GROUND, float(c2[k]))

        for tag, node in (("i", i_n), ("rx", rx), ("c", cv), ("d", cd)):
            nl.add_probe(node, node)
            labels[tag].append(node)
        k += 1

    nl.validate()
    return BuiltSlice(
        netlist=nl,
        config=config,
        pinfield=pf,
        lane_labels=labels,
        line_delays=delays,
        lengths_in=lengths,
        r7=r7,
        c2=c2,
    )


def baseline_lane_count(arch: SchemeKind, data_bits: int = 32) -> int:
    """Cells per slice for the paper-style 32-bit comparison."""

    from .codec import traces_required

    return traces_required(data_bits, arch)
