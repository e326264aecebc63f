"""Netlist primitives, geometry helpers, and slice construction tests."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zerosum.codec import SchemeKind
from zerosum.errors import ConfigError, DomainError
from zerosum.netlist import (
    C_LIGHT,
    GROUND,
    Netlist,
    TlineDerivation,
    tline_lc_from_zo,
    via_inductance,
)
from zerosum.slices import (
    INCH,
    LinkParams,
    OnDiePdnParams,
    PinfieldConfig,
    SliceConfig,
    SstBufferModel,
    build_slice_netlist,
)


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------


def test_tline_lc_for_default_pdn_segment():
    # 100 ohm, eps_r 4, 190 um pitch: the on-die rail segment L/C pair
    l, c = tline_lc_from_zo(100.0, 4.0, 190e-6)
    assert c == pytest.approx(0.01268e-12, rel=1e-3)
    assert l == pytest.approx(126.8e-12, rel=1e-3)


@given(
    z0=st.floats(1.0, 500.0),
    eps=st.floats(1.0, 12.0),
    length=st.floats(1e-6, 1.0),
)
def test_tline_lc_reconstructs_impedance_and_delay(z0, eps, length):
    l, c = tline_lc_from_zo(z0, eps, length)
    assert math.sqrt(l / c) == pytest.approx(z0, rel=1e-9)
    assert math.sqrt(l * c) == pytest.approx(length * math.sqrt(eps) / C_LIGHT, rel=1e-9)


def test_tline_lc_domain_errors():
    for args in ((0, 4, 1), (50, 0.5, 1), (50, 4, 0)):
        with pytest.raises(DomainError):
            tline_lc_from_zo(*args)
    with pytest.raises(DomainError):
        TlineDerivation(z0=-1, eps_r=4, length=0.1)
    assert TlineDerivation(50, 4, 0.1).lc() == tline_lc_from_zo(50, 4, 0.1)


def test_via_inductance_reference_value():
    # 100 mil long, 12 mil diameter barrel
    assert via_inductance(0.100, 0.012) == pytest.approx(1.40e-9, abs=0.005e-9)


def test_via_inductance_monotone_in_length():
    values = [via_inductance(l, 0.012) for l in (0.05, 0.1, 0.2, 0.4)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_via_inductance_domain_errors():
    with pytest.raises(DomainError):
        via_inductance(0.0, 0.012)
    with pytest.raises(DomainError):
        via_inductance(0.1, 0.0)
    with pytest.raises(DomainError):
        via_inductance(0.01, 0.05)  # diameter >= 4x length


# ---------------------------------------------------------------------------
# netlist graph
# ---------------------------------------------------------------------------


def _rc_netlist():
    nl = Netlist()
    nl.add_vsource("vs", "a", GROUND, volts=1.0)
    nl.add_resistor("r1", "a", "b", 50.0)
    nl.add_capacitor("c1", "b", GROUND, 1e-12)
    nl.add_probe("b", "b")
    return nl


def test_census_and_node_bookkeeping():
    nl = _rc_netlist()
    assert nl.census() == {
        "nodes": 2,
        "resistors": 1,
        "capacitors": 1,
        "series_rls": 0,
        "vsources": 1,
        "drivers": 0,
        "tlines": 0,
        "probes": 1,
    }
    assert nl.node_index(GROUND) == -1
    assert nl.node_index("a") == 0
    with pytest.raises(ConfigError):
        nl.node_index("nope")


def test_duplicate_element_names_rejected():
    nl = _rc_netlist()
    with pytest.raises(ConfigError):
        nl.add_resistor("r1", "a", GROUND, 10.0)


def test_element_value_validation():
    nl = Netlist()
    with pytest.raises(DomainError):
        nl.add_resistor("r", "a", "b", 0.0)
    with pytest.raises(DomainError):
        nl.add_capacitor("c", "a", "b", -1e-12)
    with pytest.raises(DomainError):
        nl.add_series_rl("l", "a", "b", r=-1.0, l=1e-9)
    with pytest.raises(DomainError):
        nl.add_series_rl("l", "a", "b", r=0.0, l=0.0)
    with pytest.raises(DomainError):
        nl.add_tline("t", "a", "b", z0=50.0, delay=0.0)
    with pytest.raises(DomainError):
        nl.add_driver("d", "c", "p", "g", r_out=0.0, wave=None)


def test_probe_validation():
    nl = _rc_netlist()
    with pytest.raises(ConfigError):
        nl.add_probe("x", "missing")
    with pytest.raises(ConfigError):
        nl.add_current_probe("ix", "no_such_source")
    nl.add_current_probe("ivs", "vs")
    nl.validate()


def test_validate_requires_ground_connection():
    nl = Netlist()
    nl.add_resistor("r", "a", "b", 10.0)
    with pytest.raises(ConfigError):
        nl.validate()


# ---------------------------------------------------------------------------
# pinfield
# ---------------------------------------------------------------------------


def test_default_pinfield_ratio_and_cover():
    pf = PinfieldConfig.default(8, signals_per_pg=4)
    assert (pf.signal_pins, pf.power_pins, pf.ground_pins) == (8, 2, 2)
    assert pf.assignment.count("S") == 8
    assert pf.assignment.count("P") == pf.assignment.count("G") == 2
    # uneven totals still get covered exactly
    pf = PinfieldConfig.default(10, signals_per_pg=4)
    assert (pf.signal_pins, pf.power_pins, pf.ground_pins) == (10, 3, 3)


def test_pinfield_validation():
    with pytest.raises(ConfigError):
        PinfieldConfig(2, 1, 1, assignment=("S", "P", "G"))  # counts not covered
    with pytest.raises(ConfigError):
        PinfieldConfig(1, 1, 1, assignment=("S", "P", "X"))
    with pytest.raises(ConfigError):
        PinfieldConfig.default(0)


def test_pinfield_via_inductance_uses_geometry():
    pf = PinfieldConfig.default(4)
    assert pf.via_l() == pytest.approx(via_inductance(0.100, 0.012))


# ---------------------------------------------------------------------------
# link draws
# ---------------------------------------------------------------------------


def test_link_draw_ranges_and_determinism():
    link = LinkParams(seed=42)
    lengths, r7, c2 = link.draw(16, diff_pairs=False)
    assert np.all((lengths >= 3.98) & (lengths <= 4.02))
    assert np.all((r7 >= 49.0) & (r7 <= 51.0))
    assert np.all((c2 >= 0.3e-12) & (c2 <= 0.5e-12))
    again = link.draw(16, diff_pairs=False)
    assert all(np.array_equal(a, b) for a, b in zip((lengths, r7, c2), again))
    other = LinkParams(seed=43).draw(16, diff_pairs=False)
    assert not np.array_equal(lengths, other[0])


def test_link_draw_identical_gives_midrange():
    lengths, r7, c2 = LinkParams(identical=True).draw(4, diff_pairs=False)
    assert np.all(lengths == 4.0)
    assert np.all(r7 == 50.0)
    assert np.all(c2 == 0.4e-12)


def test_link_draw_differential_pair_skew_bounded():
    link = LinkParams(seed=7)
    lengths, _, _ = link.draw(32, diff_pairs=True)
    for p in range(0, 32, 2):
        assert abs(lengths[p + 1] - lengths[p]) <= 0.020 + 1e-12
    assert np.all((lengths >= 3.98) & (lengths <= 4.02))
    with pytest.raises(ConfigError):
        link.draw(5, diff_pairs=True)


# ---------------------------------------------------------------------------
# slice assembly
# ---------------------------------------------------------------------------


def test_slice_census_matches_topology():
    lanes = 8
    built = build_slice_netlist(SliceConfig(arch=SchemeKind.se(), lanes=lanes))
    pg = built.pinfield.power_pins
    census = built.netlist.census()
    assert census == {
        # vddp, vterm, 2*pg via nodes, 9 nodes per cell
        "nodes": 2 + 2 * pg + 9 * lanes,
        # rail chaining (2 per cell after the first) + line loss + termination
        "resistors": 2 * (lanes - 1) + 2 * lanes,
        "capacitors": 2 * lanes,  # cell rail cap + load cap
        # P/G via inductors + 4 ladder segments + signal via per cell
        "series_rls": 2 * pg + 5 * lanes,
        "vsources": 2 + lanes,  # plane, termination rail, per-cell stimulus
        "drivers": lanes,
        "tlines": lanes,
        "probes": 1 + 4 * lanes,  # plane current + i/rx/c/d per cell
    }
    assert len(built.lane_labels["rx"]) == lanes
    assert built.vdd_current_label == "i_vdd_plane"


def test_slice_line_delays_follow_lengths():
    built = build_slice_netlist(
        SliceConfig(arch=SchemeKind.se(), lanes=4, link=LinkParams(identical=True))
    )
    expect = 4.0 * INCH * 2.0 / C_LIGHT  # sqrt(eps_eff)=2
    assert np.allclose(built.line_delays, expect)
    assert np.allclose(built.lengths_in, 4.0)


def test_slice_rejects_mismatched_pinfield_and_waves():
    pf = PinfieldConfig.default(4)
    with pytest.raises(ConfigError):
        build_slice_netlist(SliceConfig(arch=SchemeKind.se(), lanes=8, pinfield=pf))
    with pytest.raises(ConfigError):
        build_slice_netlist(SliceConfig(arch=SchemeKind.se(), lanes=4), waves=[None] * 3)


def test_parameter_dataclass_validation():
    with pytest.raises(ConfigError):
        OnDiePdnParams(l_seg=0.0)
    with pytest.raises(ConfigError):
        SstBufferModel(r_out=-5.0)
