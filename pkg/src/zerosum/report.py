"""Result serialization and figure rendering for scenario runs.

Writes the stable CSV schema, a human-readable summary, per-cell eye scatter
images, and sweep line charts.  Figures are rendered headlessly (Agg) next to
the delimited output.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .codec import SchemeKind, codes_with_offset, effective_bits, total_codes, traces_required
from .runner import CellResult, ResultRow

CSV_HEADER = "scenario,arch,pattern,rate_gbps,disparity,group_layout,lane,eye_mv,ripple_mv_pp"

_SORT_KEY = lambda r: (
    r.scenario,
    r.arch,
    r.pattern,
    r.rate_gbps,
    r.disparity,
    r.group_layout,
    r.lane,
)


def write_results_csv(rows: Sequence[ResultRow], path: Union[str, Path]) -> None:
    """Stable, sorted CSV; aggregation order never leaks into the file."""

    lines = [CSV_HEADER]
    for r in sorted(rows, key=_SORT_KEY):
        lines.append(
            f"{r.scenario},{r.arch},{r.pattern},{r.rate_gbps:g},{r.disparity},"
            f"{r.group_layout},{r.lane},{r.eye_mv:.3f},{r.ripple_mv_pp:.3f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_results_csv(path: Union[str, Path]) -> List[ResultRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected results header")
    rows = []
    for line in lines[1:]:
        sc, arch, pat, rate, disp, layout, lane, eye, rip = line.split(",")
        rows.append(
            ResultRow(sc, arch, pat, float(rate), int(disp), layout, int(lane), float(eye), float(rip))
        )
    return rows


def human_summary(results: Sequence[CellResult]) -> str:
    """Per-cell min/mean/max eye and worst rail ripple, fixed-width text."""

    lines = [f"{'cell':<24}{'eye min/mean/max [mV]':>28}  {'ripple pp [mV]':>15}"]
    for cell in results:
        s = cell.summary
        worst_rip = max(r.ripple_mv_pp for r in cell.rows)
        lines.append(
            f"{cell.name:<24}"
            f"{s.min * 1e3:>8.1f} /{s.mean * 1e3:>8.1f} /{s.max * 1e3:>8.1f}"
            f"  {worst_rip:>15.1f}"
        )
    return "\n".join(lines)


def render_eye_png(
    cell: CellResult, path: Union[str, Path], max_points: int = 20000
) -> None:
    """All measured lanes of one cell folded into a single eye scatter."""

    fig, ax = plt.subplots(figsize=(6, 4))
    for tf, vf in cell.eye_clouds:
        step = max(1, len(tf) // max(1, max_points // max(1, len(cell.eye_clouds))))
        ax.plot(tf[::step] / cell.ui, vf[::step] * 1e3, ".", ms=1.0, alpha=0.35, color="C0")
    ax.set_xlabel("time within UI [UI]")
    ax.set_ylabel("receiver voltage [mV]")
    ax.set_title(cell.name)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_summary_png(results: Sequence[CellResult], path: Union[str, Path]) -> None:
    """Grouped min/mean/max bars, one triple per cell."""

    names = [c.name for c in results]
    mins = [c.summary.min * 1e3 for c in results]
    means = [c.summary.mean * 1e3 for c in results]
    maxs = [c.summary.max * 1e3 for c in results]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(names)), 4))
    for off, vals, label in ((-0.25, mins, "min"), (0.0, means, "mean"), (0.25, maxs, "max")):
        ax.bar(x + off, vals, width=0.22, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("vertical eye opening [mV]")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_sweep_png(
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    path: Union[str, Path],
    xlabel: str,
    logx: bool = False,
) -> None:
    """Mean-eye line chart, one labeled line per architecture/case."""

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, ys) in series.items():
        ax.plot(xs, np.asarray(ys) * 1e3, "o-", label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean vertical eye opening [mV]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_scenario_outputs(
    scenario: str, results: Sequence[CellResult], out_dir: Union[str, Path]
) -> Path:
    """Standard output tree: results.csv, summary.txt, waveforms/, eyes/."""

    base = Path(out_dir) / scenario
    (base / "waveforms").mkdir(parents=True, exist_ok=True)
    (base / "eyes").mkdir(parents=True, exist_ok=True)
    rows = [r for cell in results for r in cell.rows]
    write_results_csv(rows, base / "results.csv")
    (base / "summary.txt").write_text(human_summary(results) + "\n")
    for cell in results:
        cell.waveforms.export(base / "waveforms" / f"{cell.name}.tsv")
        render_eye_png(cell, base / "eyes" / f"{cell.name}.png")
    render_summary_png(results, base / "summary.png")
    return base


def sweep_series(
    results: Sequence[CellResult],
    rows_x: str = "rate_gbps",
) -> Dict[str, Tuple[List[float], List[float]]]:
    """Collect (x, mean eye) per architecture label from cell rows."""

    acc: Dict[str, Dict[float, List[float]]] = defaultdict(lambda: defaultdict(list))
    for cell in results:
        for r in cell.rows:
            x = getattr(r, rows_x)
            acc[r.arch][float(x)].append(r.eye_mv / 1e3)
    out: Dict[str, Tuple[List[float], List[float]]] = {}
    for arch, by_x in acc.items():
        xs = sorted(by_x)
        out[arch] = (xs, [float(np.mean(by_x[x])) for x in xs])
    return out


# ---------------------------------------------------------------------------
# capacity tables
# ---------------------------------------------------------------------------


def format_tables() -> str:
    """The signaling-scheme capacity comparison tables as printable text."""

    out: List[str] = []

    def header(title: str) -> None:
        out.append(title)
        out.append("-" * len(title))

    header("Bits per bus width (SE / DIFF / ZS+-0)")
    out.append(f"{'traces':>7} {'SE':>6} {'DIFF':>6} {'ZS+-0':>8}")
    for traces in (8, 12, 16, 32, 64):
        out.append(
            f"{traces:>7} {traces:>6} {traces // 2:>6} {effective_bits(traces, 0):>8.2f}"
        )
    out.append("")

    header("Traces required for a payload (SE / DIFF / ZS+-0)")
    out.append(f"{'bits':>6} {'SE':>6} {'DIFF':>6} {'ZS+-0':>8}")
    for bits in (8, 16, 24, 32, 64):
        zs = traces_required(bits, SchemeKind.zs(0))
        out.append(f"{bits:>6} {bits:>6} {2 * bits:>6} {zs:>8}")
    out.append("")

    header("Bits per bus width at disparity +-2 (ZS+-2)")
    out.append(f"{'traces':>7} {'ZS+-2':>8}")
    for traces in (8, 12, 16, 20, 32, 64):
        out.append(f"{traces:>7} {effective_bits(traces, 2):>8.2f}")
    out.append("")

    header("Traces required at disparity +-2 (ZS+-2)")
    out.append(f"{'bits':>6} {'ZS+-2':>8}")
    for bits in (8, 16, 24, 32, 64):
        out.append(f"{bits:>6} {traces_required(bits, SchemeKind.zs(2)):>8}")
    out.append("")

    header("4-trace word count by disparity offset")
    out.append(f"{'disparity':>10} {'words':>6}")
    for k, d in ((2, -4), (1, -2), (0, 0), (1, 2), (2, 4)):
        out.append(f"{d:>10} {codes_with_offset(2, abs(k)):>6}")
    out.append(f"{'total':>10} {total_codes(4, 4):>6}")
    return "\n".join(out)
