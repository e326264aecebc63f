"""Circuit netlist primitives: nodes, R/L/C elements, sources, behavioral
push-pull drivers, delay-line transmission lines, and probes.

Electrical quantities are SI (ohms, henries, farads, volts, seconds); board
geometry helpers use inches, matching typical PWB unit conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, DomainError

GROUND = "0"
C_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class TlineDerivation:
    """Transmission-line L/C derivation inputs: impedance, dielectric, length."""

    z0: float
    eps_r: float
    length: float  # meters

    def __post_init__(self) -> None:
        if self.z0 <= 0:
            raise DomainError(f"Z0 must be positive, got {self.z0}")
        if self.eps_r < 1:
            raise DomainError(f"eps_r must be >= 1, got {self.eps_r}")
        if self.length <= 0:
            raise DomainError(f"length must be positive, got {self.length}")

    def lc(self) -> Tuple[float, float]:
        return tline_lc_from_zo(self.z0, self.eps_r, self.length)


def tline_lc_from_zo(z0: float, eps_r: float, segment_length: float) -> Tuple[float, float]:
    """Total series L and shunt C of a line segment from Z0 and eps_r.

    C = sqrt(eps_r) / (Z0 * c) per meter; L = Z0^2 * C, so sqrt(L/C) == Z0.
    """

    if z0 <= 0 or eps_r < 1 or segment_length <= 0:
        raise DomainError(
            f"non-physical line parameters: z0={z0}, eps_r={eps_r}, length={segment_length}"
        )
    c_total = math.sqrt(eps_r) / (z0 * C_LIGHT) * segment_length
    l_total = z0 * z0 * c_total
    return l_total, c_total


def via_inductance(length_in: float, diameter_in: float) -> float:
    """Partial self-inductance of a cylindrical via, in henries.

    L[nH] = 5.08 * h * (ln(4h/d) - 0.75) with h and d in inches; valid for
    d < 4h.
    """

    if length_in <= 0 or diameter_in <= 0:
        raise DomainError("via length and diameter must be positive")
    if diameter_in >= 4.0 * length_in:
        raise DomainError(
            f"via diameter {diameter_in} in must be below 4x length {length_in} in"
        )
    l_nh = 5.08 * length_in * (math.log(4.0 * length_in / diameter_in) - 0.75)
    return l_nh * 1e-9


class HoldLevel:
    """Constant normalized drive level; stand-in when no pattern is attached."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def level(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


class StepLevel:
    """0-to-1 level step at t_step; handy for solver step-response tests."""

    def __init__(self, t_step: float = 0.0, low: float = 0.0, high: float = 1.0):
        self.t_step = t_step
        self.low = low
        self.high = high

    def level(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t > self.t_step, self.high, self.low)


@dataclass
class Resistor:
    name: str
    a: str
    b: str
    r: float


@dataclass
class Capacitor:
    name: str
    a: str
    b: str
    c: float


@dataclass
class SeriesRL:
    """Series R+L branch, handled as one Norton companion (no internal node)."""

    name: str
    a: str
    b: str
    r: float
    l: float


@dataclass
class VSource:
    """Ideal voltage source; volts plus an optional time-varying level."""

    name: str
    pos: str
    neg: str
    volts: float = 0.0
    wave: Optional[object] = None  # anything with .level(t) -> array
    scale: float = 1.0

    def voltage(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.wave is None:
            return np.full_like(t, self.volts)
        return self.volts + self.scale * np.asarray(self.wave.level(t), dtype=float)


@dataclass
class Driver:
    """Behavioral push-pull SST output stage.

    At drive level s the pad sees a Thevenin source s*(V_hi - V_lo) + V_lo
    behind r_out, with the output current drawn from the local rails in a
    symmetric class-AB split (see the solver's driver stamp), so rail
    collapse feeds back into output amplitude and a complementary pair's
    combined rail draw stays constant through a synchronous edge.
    """

    name: str
    rail_hi: str
    pad: str
    rail_lo: str
    r_out: float
    wave: object  # .level(t) -> normalized 0..1


@dataclass
class TLine:
    """Ideal delay-line (method-of-characteristics) transmission line.

    Lossless and referenced to ground; series loss is added externally as
    lumped resistors at the ends.
    """

    name: str
    a: str
    b: str
    z0: float
    delay: float


@dataclass
class Probe:
    label: str
    kind: str  # "node" | "current"
    ref: str  # node name or VSource name


class Netlist:
    """Node/element graph of one simulated slice."""

    def __init__(self) -> None:
        self._nodes: Dict[str, int] = {}
        self.resistors: List[Resistor] = []
        self.capacitors: List[Capacitor] = []
        self.series_rls: List[SeriesRL] = []
        self.vsources: List[VSource] = []
        self.drivers: List[Driver] = []
        self.tlines: List[TLine] = []
        self.probes: List[Probe] = []
        self._names: set = set()

    # -- nodes ------------------------------------------------------------
    def node(self, name: str) -> str:
        if name != GROUND and name not in self._nodes:
            self._nodes[name] = len(self._nodes)
        return name

    def node_index(self, name: str) -> int:
        """Index of a node; the global reference node is -1."""

        if name == GROUND:
            return -1
        try:
            return self._nodes[name]
        except KeyError:
            raise ConfigError(f"unknown node {name!r}") from None

    @property
    def node_names(self) -> List[str]:
        return list(self._nodes)

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    # -- elements ---------------------------------------------------------
    def _register(self, name: str) -> None:
        if name in self._names:
            raise ConfigError(f"duplicate element name {name!r}")
        self._names.add(name)

    def add_resistor(self, name: str, a: str, b: str, r: float) -> Resistor:
        if r <= 0:
            raise DomainError(f"resistor {name}: r must be positive, got {r}")
        self._register(name)
        el = Resistor(name, self.node(a), self.node(b), r)
        self.resistors.append(el)
        return el

    def add_capacitor(self, name: str, a: str, b: str, c: float) -> Capacitor:
        if c <= 0:
            raise DomainError(f"capacitor {name}: c must be positive, got {c}")
        self._register(name)
        el = Capacitor(name, self.node(a), self.node(b), c)
        self.capacitors.append(el)
        return el

    def add_series_rl(self, name: str, a: str, b: str, r: float, l: float) -> SeriesRL:
        if r < 0 or l <= 0:
            raise DomainError(f"series RL {name}: need r >= 0 and l > 0")
        self._register(name)
        el = SeriesRL(name, self.node(a), self.node(b), r, l)
        self.series_rls.append(el)
        return el

    def add_vsource(
        self,
        name: str,
        pos: str,
        neg: str,
        volts: float = 0.0,
        wave: Optional[object] = None,
        scale: float = 1.0,
    ) -> VSource:
        self._register(name)
        el = VSource(name, self.node(pos), self.node(neg), volts, wave, scale)
        self.vsources.append(el)
        return el

    def add_driver(
        self, name: str, rail_hi: str, pad: str, rail_lo: str, r_out: float, wave: object
    ) -> Driver:
        if r_out <= 0:
            raise DomainError(f"driver {name}: r_out must be positive")
        self._register(name)
        el = Driver(name, self.node(rail_hi), self.node(pad), self.node(rail_lo), r_out, wave)
        self.drivers.append(el)
        return el

    def add_tline(self, name: str, a: str, b: str, z0: float, delay: float) -> TLine:
        if z0 <= 0 or delay <= 0:
            raise DomainError(f"tline {name}: need z0 > 0 and delay > 0")
        self._register(name)
        el = TLine(name, self.node(a), self.node(b), z0, delay)
        self.tlines.append(el)
        return el

    def add_probe(self, label: str, node: str) -> Probe:
        if node != GROUND and node not in self._nodes:
            raise ConfigError(f"probe {label!r} references unknown node {node!r}")
        p = Probe(label, "node", node)
        self.probes.append(p)
        return p

    def add_current_probe(self, label: str, source_name: str) -> Probe:
        if not any(s.name == source_name for s in self.vsources):
            raise ConfigError(f"current probe {label!r} references unknown source {source_name!r}")
        p = Probe(label, "current", source_name)
        self.probes.append(p)
        return p

    # -- inspection ---------------------------------------------------------
    def census(self) -> Dict[str, int]:
        """Deterministic node/element counts (golden-file friendly)."""

        return {
            "nodes": self.num_nodes,
            "resistors": len(self.resistors),
            "capacitors": len(self.capacitors),
            "series_rls": len(self.series_rls),
            "vsources": len(self.vsources),
            "drivers": len(self.drivers),
            "tlines": len(self.tlines),
            "probes": len(self.probes),
        }

    def validate(self) -> None:
        """Check probe references and that at least one element touches ground."""

        for p in self.probes:
            if p.kind == "node" and p.ref != GROUND and p.ref not in self._nodes:
                raise ConfigError(f"probe {p.label!r} references unknown node {p.ref!r}")
        touches_ground = any(
            GROUND in (el.a, el.b)
            for group in (self.resistors, self.capacitors, self.series_rls, self.tlines)
            for el in group
        ) or any(GROUND in (s.pos, s.neg) for s in self.vsources)
        if self.num_nodes and not touches_ground:
            raise ConfigError("netlist has no connection to the reference node")
