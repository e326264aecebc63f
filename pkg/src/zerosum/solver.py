"""DC operating point and fixed-step trapezoidal transient solver (MNA).

Unknowns are node voltages plus ideal-source branch currents.  Capacitors and
series R-L branches use trapezoidal Norton companions; transmission lines use
method-of-characteristics delay lines with linear interpolation at the
delay-line read.  The behavioral driver conductances vary with the drive
level, so the system matrix is refactorized only on steps where any drive
level changed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import ConfigError, SingularNetworkError, SolverError
from .netlist import GROUND, Netlist


@dataclass
class TransientConfig:
    """Fixed-step trapezoidal integration settings."""

    dt: float
    t_stop: float
    settle_time: float = 0.0
    record_energy: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_stop <= 0:
            raise ConfigError("dt and t_stop must be positive")


def default_time_step(rate: float, rise_fall: Optional[float] = None) -> float:
    """UI/128, but never below 0.5 ps (caps the step count at high rates).

    When the edge time is faster than the UI-derived step would resolve (fixed
    edge rate at a low data rate), the step shrinks to an eighth of it.
    """

    dt = 1.0 / rate / 128.0
    if rise_fall is not None:
        dt = min(dt, rise_fall / 8.0)
    return max(dt, 0.5e-12)


@dataclass
class WaveformSet:
    """Uniformly sampled probe waveforms from one transient run."""

    dt: float
    t: np.ndarray
    data: Dict[str, np.ndarray]
    settle_time: float = 0.0
    max_kcl_residual: float = 0.0
    current_scale: float = 0.0
    energy: Optional[np.ndarray] = None

    def __getitem__(self, label: str) -> np.ndarray:
        return self.data[label]

    def labels(self) -> List[str]:
        return list(self.data)

    def export(self, path: Union[str, Path]) -> None:
        """Tab-separated text dump, 9 significant digits, reproducible."""

        path = Path(path)
        labels = self.labels()
        with path.open("w") as fh:
            fh.write(f"# dt={self.dt:.8e}\n")
            fh.write(f"# settle_time={self.settle_time:.8e}\n")
            fh.write("time\t" + "\t".join(labels) + "\n")
            cols = [self.t] + [self.data[k] for k in labels]
            for row in zip(*cols):
                fh.write("\t".join(f"{v:.8e}" for v in row) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WaveformSet":
        path = Path(path)
        dt = settle = 0.0
        labels: List[str] = []
        rows: List[List[float]] = []
        for line in path.read_text().splitlines():
            if line.startswith("# dt="):
                dt = float(line.split("=", 1)[1])
            elif line.startswith("# settle_time="):
                settle = float(line.split("=", 1)[1])
            elif line.startswith("time\t"):
                labels = line.split("\t")[1:]
            elif line.strip():
                rows.append([float(v) for v in line.split("\t")])
        arr = np.array(rows)
        data = {lab: arr[:, i + 1] for i, lab in enumerate(labels)}
        return cls(dt=dt, t=arr[:, 0], data=data, settle_time=settle)


def _check_dc_connectivity(netlist: Netlist) -> None:
    """Every node must reach ground through a DC-conducting element."""

    n = netlist.num_nodes
    parent = list(range(n + 1))  # slot n is ground

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        parent[find(a)] = find(b)

    def slot(name: str) -> int:
        idx = netlist.node_index(name)
        return n if idx < 0 else idx

    for el in netlist.resistors + netlist.series_rls + netlist.tlines:
        union(slot(el.a), slot(el.b))
    for src in netlist.vsources:
        union(slot(src.pos), slot(src.neg))
    for drv in netlist.drivers:
        union(slot(drv.rail_hi), slot(drv.pad))
        union(slot(drv.pad), slot(drv.rail_lo))
    root = find(n)
    for name in netlist.node_names:
        if find(slot(name)) != root:
            raise SingularNetworkError(
                f"node {name!r} has no DC path to ground (floating at the operating point)"
            )


def _stamp_g(A: np.ndarray, ia: int, ib: int, g: float) -> None:
    if ia >= 0:
        A[ia, ia] += g
    if ib >= 0:
        A[ib, ib] += g
    if ia >= 0 and ib >= 0:
        A[ia, ib] -= g
        A[ib, ia] -= g


def _driver_entries(hi: int, pad: int, lo: int):
    """MNA entries of the push-pull SST stage at drive level s.

    Each entry is (row, col, (p0, p1, p2)) with conductance value
    (p0 + p1*s + p2*s^2) / r_out.  The pad port is the Thevenin source
    s*(V_hi - V_lo) + V_lo behind r_out, i.e. output current
    I = (s*V_hi + (1-s)*V_lo - V_pad) / r_out.  The rails supply
    I_hi = s*I + X and I_lo = (1-s)*I - X, where
    X = s*(1-s)*(V_hi - V_lo) / (2*r_out) is the class-AB overlap current of
    the half-switched output segments.  This split is symmetric, passive
    (power absorbed = r_out*I^2 + 2*r_out*X^2 >= 0), and keeps the combined
    rail draw of a synchronous complementary pair constant through the edge,
    while rail collapse still feeds back into the output amplitude.
    """

    return (
        (pad, pad, (1.0, 0.0, 0.0)),
        (pad, hi, (0.0, -1.0, 0.0)),
        (hi, pad, (0.0, -1.0, 0.0)),
        (pad, lo, (-1.0, 1.0, 0.0)),
        (lo, pad, (-1.0, 1.0, 0.0)),
        (hi, hi, (0.0, 0.5, 0.5)),
        (lo, lo, (1.0, -1.5, 0.5)),
        (hi, lo, (0.0, 0.5, -0.5)),
        (lo, hi, (0.0, 0.5, -0.5)),
    )


@dataclass
class _DcSolution:
    voltages: np.ndarray  # per node index
    rl_currents: np.ndarray  # a -> b, aligned with netlist.series_rls
    tline_currents: np.ndarray  # into port a, aligned with netlist.tlines
    source_currents: np.ndarray  # pos -> through source -> neg

    def v(self, idx: int) -> float:
        return 0.0 if idx < 0 else float(self.voltages[idx])


def _solve_dc(netlist: Netlist, t0: float = 0.0) -> _DcSolution:
    _check_dc_connectivity(netlist)
    n = netlist.num_nodes
    idx = netlist.node_index

    # branch unknowns: sources, zero-R series RLs (exact shorts), tlines (DC shorts)
    zero_rls = [el for el in netlist.series_rls if el.r == 0.0]
    branches = (
        [("src", el) for el in netlist.vsources]
        + [("short", el) for el in zero_rls]
        + [("short", el) for el in netlist.tlines]
    )
    m = len(branches)
    N = n + m
    A = np.zeros((N, N))
    b = np.zeros(N)

    for el in netlist.resistors:
        _stamp_g(A, idx(el.a), idx(el.b), 1.0 / el.r)
    for el in netlist.series_rls:
        if el.r > 0.0:
            _stamp_g(A, idx(el.a), idx(el.b), 1.0 / el.r)
    for drv in netlist.drivers:
        s0 = float(np.asarray(drv.wave.level(np.array([t0])))[0])
        hi, pad, lo = idx(drv.rail_hi), idx(drv.pad), idx(drv.rail_lo)
        for r, c, (p0, p1, p2) in _driver_entries(hi, pad, lo):
            if r >= 0 and c >= 0:
                A[r, c] += (p0 + p1 * s0 + p2 * s0 * s0) / drv.r_out
    for k, (kind, el) in enumerate(branches):
        row = n + k
        if kind == "src":
            ia, ib = idx(el.pos), idx(el.neg)
            b[row] = float(el.voltage(np.array([t0]))[0])
        else:
            ia, ib = idx(el.a), idx(el.b)
        if ia >= 0:
            A[ia, row] += 1.0
            A[row, ia] += 1.0
        if ib >= 0:
            A[ib, row] -= 1.0
            A[row, ib] -= 1.0

    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(f"singular DC system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularNetworkError("DC solution is not finite")

    voltages = x[:n]
    n_src = len(netlist.vsources)
    n_zrl = len(zero_rls)
    src_cur = x[n : n + n_src]
    zrl_cur = dict(zip((id(el) for el in zero_rls), x[n + n_src : n + n_src + n_zrl]))
    tl_cur = x[n + n_src + n_zrl :]

    rl_cur = np.empty(len(netlist.series_rls))
    for i, el in enumerate(netlist.series_rls):
        if el.r > 0.0:
            va = 0.0 if idx(el.a) < 0 else voltages[idx(el.a)]
            vb = 0.0 if idx(el.b) < 0 else voltages[idx(el.b)]
            rl_cur[i] = (va - vb) / el.r
        else:
            rl_cur[i] = zrl_cur[id(el)]
    return _DcSolution(voltages, rl_cur, np.asarray(tl_cur), np.asarray(src_cur))


def dc_operating_point(netlist: Netlist, t0: float = 0.0) -> Dict[str, float]:
    """Node voltages with inductors shorted and capacitors open at time t0."""

    sol = _solve_dc(netlist, t0)
    return {name: float(sol.voltages[i]) for name, i in zip(netlist.node_names, range(netlist.num_nodes))}


def transient(
    netlist: Netlist,
    config: TransientConfig,
    drives: Optional[Dict[str, object]] = None,
) -> WaveformSet:
    """Fixed-step trapezoidal transient; returns probed waveforms at dt."""

    netlist.validate()
    if drives:
        for drv in netlist.drivers:
            if drv.name in drives:
                drv.wave = drives[drv.name]
    dt = config.dt
    for tl in netlist.tlines:
        if tl.delay < dt:
            raise ConfigError(
                f"tline {tl.name}: delay {tl.delay:g} s is below the time step {dt:g} s"
            )

    n = netlist.num_nodes
    idx = netlist.node_index
    srcs = netlist.vsources
    m = len(srcs)
    N = n + m
    n_steps = int(round(config.t_stop / dt))
    tgrid = np.arange(n_steps + 1) * dt

    # ---- static stamps ----------------------------------------------------
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []

    def stamp(ia: int, ib: int, g: float) -> None:
        if ia >= 0:
            rows.append(ia), cols.append(ia), vals.append(g)
        if ib >= 0:
            rows.append(ib), cols.append(ib), vals.append(g)
        if ia >= 0 and ib >= 0:
            rows.append(ia), cols.append(ib), vals.append(-g)
            rows.append(ib), cols.append(ia), vals.append(-g)

    for el in netlist.resistors:
        stamp(idx(el.a), idx(el.b), 1.0 / el.r)

    caps = netlist.capacitors
    ca = np.array([idx(el.a) for el in caps], dtype=int)
    cb = np.array([idx(el.b) for el in caps], dtype=int)
    cval = np.array([el.c for el in caps])
    Gc = 2.0 * cval / dt
    for i, el in enumerate(caps):
        stamp(int(ca[i]), int(cb[i]), float(Gc[i]))

    rls = netlist.series_rls
    ra = np.array([idx(el.a) for el in rls], dtype=int)
    rb = np.array([idx(el.b) for el in rls], dtype=int)
    rl_r = np.array([el.r for el in rls])
    rl_l = np.array([el.l for el in rls])
    Grl = 1.0 / (rl_r + 2.0 * rl_l / dt)
    Krl = 2.0 * rl_l / dt - rl_r
    for i, el in enumerate(rls):
        stamp(int(ra[i]), int(rb[i]), float(Grl[i]))

    tls = netlist.tlines
    ta = np.array([idx(el.a) for el in tls], dtype=int)
    tb = np.array([idx(el.b) for el in tls], dtype=int)
    tz0 = np.array([el.z0 for el in tls])
    dsamp = np.array([el.delay / dt for el in tls])
    for i in range(len(tls)):
        for port in (int(ta[i]), int(tb[i])):
            if port >= 0:
                rows.append(port), cols.append(port), vals.append(1.0 / tz0[i])

    for k, src in enumerate(srcs):
        row = n + k
        for node, sgn in ((idx(src.pos), 1.0), (idx(src.neg), -1.0)):
            if node >= 0:
                rows.append(node), cols.append(row), vals.append(sgn)
                rows.append(row), cols.append(node), vals.append(sgn)

    static_rows = np.array(rows, dtype=int)
    static_cols = np.array(cols, dtype=int)
    static_vals = np.array(vals)

    # ---- driver (time-varying) stamps --------------------------------------
    drvs = netlist.drivers
    d_rout = np.array([d.r_out for d in drvs])
    d_rows: List[int] = []
    d_cols: List[int] = []
    d_di: List[int] = []
    d_poly: List[Tuple[float, float, float]] = []
    for di, drv in enumerate(drvs):
        hi, pad, lo = idx(drv.rail_hi), idx(drv.pad), idx(drv.rail_lo)
        for r, c, poly in _driver_entries(hi, pad, lo):
            if r >= 0 and c >= 0:
                d_rows.append(r), d_cols.append(c), d_di.append(di)
                d_poly.append(poly)
    drv_rows = np.array(d_rows, dtype=int)
    drv_cols = np.array(d_cols, dtype=int)
    drv_di = np.array(d_di, dtype=int)
    drv_poly = np.array(d_poly).reshape(-1, 3)
    all_rows = np.concatenate([static_rows, drv_rows])
    all_cols = np.concatenate([static_cols, drv_cols])

    if drvs:
        S = np.vstack([np.asarray(d.wave.level(tgrid), dtype=float) for d in drvs])
    else:
        S = np.zeros((0, n_steps + 1))
    if m:
        Vsrc = np.vstack([src.voltage(tgrid) for src in srcs])
    else:
        Vsrc = np.zeros((0, n_steps + 1))

    def factorize(s_col: np.ndarray):
        if len(drvs):
            se = s_col[drv_di]
            dvals = (drv_poly[:, 0] + drv_poly[:, 1] * se + drv_poly[:, 2] * se * se) / d_rout[
                drv_di
            ]
        else:
            dvals = np.empty(0)
        A = sp.csc_matrix(
            (np.concatenate([static_vals, dvals]), (all_rows, all_cols)), shape=(N, N)
        )
        try:
            return A, splu(A)
        except RuntimeError as exc:
            raise SingularNetworkError(f"singular transient system: {exc}") from exc

    # ---- initial conditions from the DC operating point ---------------------
    dc = _solve_dc(netlist, t0=0.0)
    volt0 = dc.voltages

    def v_of(ids: np.ndarray, x: np.ndarray) -> np.ndarray:
        safe = np.maximum(ids, 0)
        return np.where(ids >= 0, x[safe], 0.0)

    cap_vp = v_of(ca, volt0) - v_of(cb, volt0) if caps else np.empty(0)
    cap_ip = np.zeros(len(caps))
    rl_vp = v_of(ra, volt0) - v_of(rb, volt0) if rls else np.empty(0)
    rl_ip = dc.rl_currents.copy() if rls else np.empty(0)

    n_tl = len(tls)
    if n_tl:
        va0 = v_of(ta, volt0)
        vb0 = v_of(tb, volt0)
        i1_0 = dc.tline_currents
        W_ab = np.zeros((n_tl, n_steps + 1))  # wave launched at a, traveling to b
        W_ba = np.zeros((n_tl, n_steps + 1))
        W_ab_init = va0 + tz0 * i1_0
        W_ba_init = vb0 - tz0 * i1_0
        W_ab[:, 0] = W_ab_init
        W_ba[:, 0] = W_ba_init

    # ---- probes --------------------------------------------------------------
    src_index = {s.name: k for k, s in enumerate(srcs)}
    probe_specs: List[Tuple[str, int]] = []  # (kind, index)
    for p in netlist.probes:
        if p.kind == "node":
            probe_specs.append(("node", idx(p.ref)))
        else:
            probe_specs.append(("current", src_index[p.ref]))
    out = np.empty((len(probe_specs), n_steps + 1))
    pn_pi = np.array([pi for pi, (k, _) in enumerate(probe_specs) if k == "node"], dtype=int)
    pn_ref = np.array([r for k, r in probe_specs if k == "node"], dtype=int)
    pc_pi = np.array([pi for pi, (k, _) in enumerate(probe_specs) if k == "current"], dtype=int)
    pc_ref = np.array([r for k, r in probe_specs if k == "current"], dtype=int)
    for pi, (kind, ref) in enumerate(probe_specs):
        if kind == "node":
            out[pi, 0] = 0.0 if ref < 0 else volt0[ref]
        else:
            # current delivered by the source out of its + terminal
            out[pi, 0] = -dc.source_currents[ref]

    energy = np.zeros(n_steps + 1) if config.record_energy else None
    if energy is not None:
        energy[0] = 0.5 * float(np.sum(cval * cap_vp**2)) + 0.5 * float(
            np.sum(rl_l * rl_ip**2)
        )

    # ---- time loop -----------------------------------------------------------
    lu = None
    A = None
    last_s: Optional[np.ndarray] = None
    max_resid = 0.0
    cur_scale = 0.0
    line_ids = np.arange(n_tl)

    for j in range(1, n_steps + 1):
        s_col = S[:, j]
        if lu is None or not np.array_equal(s_col, last_s):
            A, lu = factorize(s_col)
            last_s = s_col.copy()

        b = np.zeros(N)
        if len(caps):
            ieq_c = Gc * cap_vp + cap_ip
            mask = ca >= 0
            np.add.at(b, ca[mask], ieq_c[mask])
            mask = cb >= 0
            np.add.at(b, cb[mask], -ieq_c[mask])
        if len(rls):
            ieq_rl = Grl * (rl_vp + Krl * rl_ip)
            mask = ra >= 0
            np.add.at(b, ra[mask], -ieq_rl[mask])
            mask = rb >= 0
            np.add.at(b, rb[mask], ieq_rl[mask])
        if n_tl:
            jd = j - dsamp
            i0 = np.floor(jd).astype(int)
            frac = jd - i0
            i1 = i0 + 1

            def read(W: np.ndarray, Winit: np.ndarray) -> np.ndarray:
                w0 = np.where(i0 <= 0, Winit, W[line_ids, np.clip(i0, 0, n_steps)])
                w1 = np.where(i1 <= 0, Winit, W[line_ids, np.clip(i1, 0, n_steps)])
                return w0 + frac * (w1 - w0)

            Ea = read(W_ba, W_ba_init)  # incident at port a came from port b
            Eb = read(W_ab, W_ab_init)
            mask = ta >= 0
            np.add.at(b, ta[mask], (Ea / tz0)[mask])
            mask = tb >= 0
            np.add.at(b, tb[mask], (Eb / tz0)[mask])
        if m:
            b[n:] = Vsrc[:, j]

        x = lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise SolverError(f"non-finite solution at step {j} (t={j * dt:g} s)")

        resid = A @ x - b
        if n:
            max_resid = max(max_resid, float(np.max(np.abs(resid[:n]))))

        # state updates
        if len(caps):
            v_new = v_of(ca, x) - v_of(cb, x)
            cap_ip = Gc * v_new - ieq_c
            cap_vp = v_new
        if len(rls):
            v_new = v_of(ra, x) - v_of(rb, x)
            rl_ip = Grl * v_new + ieq_rl
            rl_vp = v_new
        if n_tl:
            Va = v_of(ta, x)
            Vb = v_of(tb, x)
            W_ab[:, j] = 2.0 * Va - Ea
            W_ba[:, j] = 2.0 * Vb - Eb

        step_scale = 0.0
        if m:
            step_scale = float(np.max(np.abs(x[n:])))
        if len(rls):
            step_scale = max(step_scale, float(np.max(np.abs(rl_ip))))
        if len(caps):
            step_scale = max(step_scale, float(np.max(np.abs(cap_ip))))
        cur_scale = max(cur_scale, step_scale)

        if len(pn_pi):
            out[pn_pi, j] = v_of(pn_ref, x)
        if len(pc_pi):
            out[pc_pi, j] = -x[n + pc_ref]
        if energy is not None:
            energy[j] = 0.5 * float(np.sum(cval * cap_vp**2)) + 0.5 * float(
                np.sum(rl_l * rl_ip**2)
            )

    data = {p.label: out[pi] for pi, p in enumerate(netlist.probes)}
    return WaveformSet(
        dt=dt,
        t=tgrid,
        data=data,
        settle_time=config.settle_time,
        max_kcl_residual=max_resid,
        current_scale=cur_scale,
        energy=energy,
    )
