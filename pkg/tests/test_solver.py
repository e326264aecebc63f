"""Solver verification against closed-form circuit responses."""

import numpy as np
import pytest

from zerosum.errors import ConfigError, SingularNetworkError
from zerosum.netlist import GROUND, HoldLevel, Netlist, StepLevel
from zerosum.solver import (
    TransientConfig,
    WaveformSet,
    dc_operating_point,
    default_time_step,
    transient,
)
from zerosum.stimulus import DriveWaveform


def _matched_link(wave, delay=677e-12):
    """50 ohm driver -> 50 ohm line -> 50 ohm termination to 0.5 V."""

    nl = Netlist()
    nl.add_vsource("vdd", "vdd", GROUND, volts=1.0)
    nl.add_vsource("vterm", "vterm", GROUND, volts=0.5)
    nl.add_driver("drv", "vdd", "pad", GROUND, r_out=50.0, wave=wave)
    nl.add_tline("tl", "pad", "rx", z0=50.0, delay=delay)
    nl.add_resistor("rterm", "rx", "vterm", 50.0)
    nl.add_probe("pad", "pad")
    nl.add_probe("rx", "rx")
    return nl


def _cross_time(t, v, level, rising=True):
    v = v - level
    if not rising:
        v = -v
    idx = np.nonzero((v[:-1] < 0) & (v[1:] >= 0))[0]
    i = idx[0]
    frac = -v[i] / (v[i + 1] - v[i])
    return t[i] + frac * (t[i + 1] - t[i])


# ---------------------------------------------------------------------------
# closed-form oracles
# ---------------------------------------------------------------------------


def test_rc_step_response_matches_exponential():
    r, c = 50.0, 1e-12
    tau = r * c
    nl = Netlist()
    nl.add_vsource("vs", "a", GROUND, wave=StepLevel(t_step=0.0))
    nl.add_resistor("r", "a", "b", r)
    nl.add_capacitor("c", "b", GROUND, c)
    nl.add_probe("b", "b")
    dt = tau / 500.0
    ws = transient(nl, TransientConfig(dt=dt, t_stop=6.0 * tau))
    # the discrete source steps between t=0 and t=dt; center the reference
    ref = 1.0 - np.exp(-np.maximum(ws.t - 0.5 * dt, 0.0) / tau)
    err = np.abs(ws["b"][2:] - ref[2:])
    assert err.max() < 0.005  # within 0.5% of the 1 V final value


def test_lc_ring_frequency_matches_analytic():
    l, c = 10e-9, 1e-12
    f0 = 1.0 / (2.0 * np.pi * np.sqrt(l * c))  # 1.5915 GHz
    nl = Netlist()
    nl.add_vsource("vs", "a", GROUND, wave=StepLevel(t_step=0.0))
    nl.add_series_rl("l", "a", "b", r=0.0, l=l)
    nl.add_capacitor("c", "b", GROUND, c)
    nl.add_probe("b", "b")
    dt = 0.5e-12
    ws = transient(nl, TransientConfig(dt=dt, t_stop=8.0 / f0))
    v = ws["b"] - 1.0  # rings symmetrically about the source level
    sign = np.sign(v)
    crossings = np.nonzero((sign[:-1] < 0) & (sign[1:] >= 0))[0]
    # interpolated rising zero crossings are one period apart
    times = [
        ws.t[i] - v[i] * dt / (v[i + 1] - v[i]) for i in crossings[1:]
    ]
    periods = np.diff(times)
    f_meas = 1.0 / periods.mean()
    assert f_meas == pytest.approx(f0, rel=0.01)


def test_matched_link_swing_delay_and_reflections():
    delay = 677e-12
    ui = 4.0 * delay
    wave = DriveWaveform(
        bits=np.array([0, 1, 1, 1]), unit_interval=ui, rise_fall=0.05 * ui
    )
    nl = _matched_link(wave, delay)
    dt = 1e-12
    ws = transient(nl, TransientConfig(dt=dt, t_stop=3.5 * ui))
    third = ws.t > 2.5 * ui  # well after the edge and one line flight
    assert ws["rx"][ws.t < 0.4 * ui].mean() == pytest.approx(0.25, rel=0.02)
    assert ws["rx"][third].mean() == pytest.approx(0.75, rel=0.02)
    # arrival delay: pad and receiver cross mid-swing one line flight apart
    t_pad = _cross_time(ws.t, ws["pad"], 0.5)
    t_rx = _cross_time(ws.t, ws["rx"], 0.5)
    assert abs((t_rx - t_pad) - delay) <= dt
    # residual reflections after settling: < 1% of the 0.5 V incident step
    settled = ws.t > t_rx + 2.0 * delay
    assert np.abs(ws["rx"][settled] - 0.75).max() < 0.01 * 0.5


def test_dc_operating_point_matched_link():
    low = dc_operating_point(_matched_link(HoldLevel(0.0)))
    high = dc_operating_point(_matched_link(HoldLevel(1.0)))
    assert low["rx"] == pytest.approx(0.25, abs=1e-9)
    assert high["rx"] == pytest.approx(0.75, abs=1e-9)
    assert low["pad"] == pytest.approx(0.25, abs=1e-9)


# ---------------------------------------------------------------------------
# numerical invariants
# ---------------------------------------------------------------------------


def test_kcl_residual_is_negligible():
    wave = DriveWaveform(
        bits=np.array([0, 1, 0, 1]), unit_interval=1e-9, rise_fall=0.1e-9
    )
    ws = transient(_matched_link(wave), TransientConfig(dt=1e-12, t_stop=4e-9))
    assert ws.max_kcl_residual < 1e-9 * max(ws.current_scale, 1e-6)


def test_stored_energy_decays_after_excitation_ends():
    # one pulse into a dissipative RLC; once the source is quiet again the
    # trapezoidal rule must never create stored energy
    ui = 1e-9
    wave = DriveWaveform(
        bits=np.array([0, 1, 0, 0, 0, 0, 0, 0]), unit_interval=ui, rise_fall=0.2 * ui
    )
    nl = Netlist()
    nl.add_vsource("vs", "a", GROUND, wave=wave)
    nl.add_resistor("r", "a", "b", 5.0)
    nl.add_series_rl("l", "b", "c", r=0.5, l=5e-9)
    nl.add_capacitor("c1", "c", GROUND, 2e-12)
    nl.add_probe("c", "c")
    ws = transient(
        nl, TransientConfig(dt=1e-12, t_stop=8 * ui, record_energy=True)
    )
    quiet = ws.t > 2.5 * ui
    tail = ws.energy[quiet]
    assert tail[0] > 0.0
    assert np.all(np.diff(tail) <= 1e-18)


def test_transient_is_bit_reproducible():
    wave = DriveWaveform(
        bits=np.array([0, 1, 1, 0]), unit_interval=1e-9, rise_fall=0.1e-9
    )
    cfg = TransientConfig(dt=2e-12, t_stop=4e-9)
    a = transient(_matched_link(wave), cfg)
    b = transient(_matched_link(wave), cfg)
    assert np.array_equal(a.t, b.t)
    for label in a.labels():
        assert np.array_equal(a[label], b[label])


def test_drive_override_replaces_wave():
    nl = _matched_link(HoldLevel(0.0))
    ws = transient(
        nl, TransientConfig(dt=1e-11, t_stop=4e-9), drives={"drv": HoldLevel(1.0)}
    )
    assert ws["rx"][-1] == pytest.approx(0.75, rel=0.02)


# ---------------------------------------------------------------------------
# diagnostics and configuration
# ---------------------------------------------------------------------------


def test_floating_node_is_diagnosed_by_name():
    nl = Netlist()
    nl.add_vsource("vs", "a", GROUND, volts=1.0)
    nl.add_resistor("r", "a", "b", 50.0)
    nl.add_capacitor("c", "b", "orphan", 1e-12)  # no DC path past the cap
    nl.add_probe("b", "b")
    with pytest.raises(SingularNetworkError, match="orphan"):
        transient(nl, TransientConfig(dt=1e-12, t_stop=1e-9))


def test_tline_delay_below_time_step_rejected():
    nl = _matched_link(HoldLevel(0.0), delay=0.5e-12)
    with pytest.raises(ConfigError):
        transient(nl, TransientConfig(dt=1e-12, t_stop=1e-9))


def test_transient_config_validation():
    with pytest.raises(ConfigError):
        TransientConfig(dt=0.0, t_stop=1e-9)
    with pytest.raises(ConfigError):
        TransientConfig(dt=1e-12, t_stop=0.0)


def test_default_time_step():
    assert default_time_step(16e9) == pytest.approx(0.5e-12)  # floored
    assert default_time_step(1e9) == pytest.approx(1e-9 / 128.0)
    # a fast fixed edge at a slow rate tightens the step to resolve it
    assert default_time_step(1e9, rise_fall=16e-12) == pytest.approx(2e-12)


def test_waveform_export_load_roundtrip(tmp_path):
    wave = DriveWaveform(
        bits=np.array([0, 1, 0, 1]), unit_interval=1e-9, rise_fall=0.1e-9
    )
    ws = transient(
        _matched_link(wave), TransientConfig(dt=1e-11, t_stop=4e-9, settle_time=1e-9)
    )
    path = tmp_path / "wf.tsv"
    ws.export(path)
    back = WaveformSet.load(path)
    assert back.dt == pytest.approx(ws.dt)
    assert back.settle_time == pytest.approx(ws.settle_time)
    assert back.labels() == ws.labels()
    for label in ws.labels():
        assert np.allclose(back[label], ws[label], rtol=1e-7, atol=1e-12)
    # a second export of the same run is byte-identical
    path2 = tmp_path / "wf2.tsv"
    ws.export(path2)
    assert path.read_bytes() == path2.read_bytes()
