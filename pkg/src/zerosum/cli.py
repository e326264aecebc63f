"""Command-line scenario runner.

Verbs: tables, baseline, disparity-sweep, bus-size, rate-sweep,
codebook export|import.  Exit codes: 0 success, 1 solver/runtime failure,
2 configuration error.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from . import report
from .codec import (
    DisparityBound,
    build_codebook,
    load_codebook,
    save_codebook,
)
from .errors import ConfigError, DomainError, SolverError, ZeroSumError
from .runner import ScenarioConfig, load_scenario_config, run_scenario

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _load_config(config: Optional[str], out: Optional[str], seed: Optional[int], jobs: Optional[int]) -> ScenarioConfig:
    if config is not None:
        return load_scenario_config(config, out_dir=out, seed=seed, jobs=jobs)
    kwargs = {}
    if out is not None:
        kwargs["out_dir"] = out
    if seed is not None:
        kwargs["seed"] = seed
    if jobs is not None:
        kwargs["jobs"] = jobs
    return ScenarioConfig(**kwargs)


def common_options(fn):
    fn = click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="scenario config file (key = value lines)")(fn)
    fn = click.option("--out", type=click.Path(file_okay=False), default=None, help="output directory")(fn)
    fn = click.option("--seed", type=int, default=None, help="scenario seed")(fn)
    fn = click.option("--jobs", type=int, default=None, help="parallel cell solves")(fn)
    return fn


@click.group()
def main() -> None:
    """Zero-sum parallel-bus signaling experiments."""


def _run(scenario: str, config, out, seed, jobs) -> None:
    try:
        cfg = _load_config(config, out, seed, jobs)
    except (ConfigError, DomainError, ValueError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        results = run_scenario(scenario, cfg)
        base = report.write_scenario_outputs(scenario, results, cfg.out_dir)
        if scenario == "rate-sweep":
            report.render_sweep_png(
                report.sweep_series(results, "rate_gbps"),
                base / "sweep.png",
                "data rate [Gbps]",
                logx=True,
            )
        elif scenario == "disparity-sweep":
            report.render_sweep_png(
                report.sweep_series(results, "disparity"),
                base / "sweep.png",
                "disparity bound",
            )
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (SolverError, ZeroSumError, OSError) as exc:
        click.echo(f"run failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(report.human_summary(results))
    click.echo(f"results written to {base}")


@main.command()
def tables() -> None:
    """Print the signaling-scheme capacity tables."""

    click.echo(report.format_tables())


@main.command()
@common_options
def baseline(config, out, seed, jobs) -> None:
    """3 architectures x {worst, typical} eyes and ripple at 16 Gbps."""

    _run("baseline", config, out, seed, jobs)


@main.command("disparity-sweep")
@common_options
def disparity_sweep(config, out, seed, jobs) -> None:
    """ZS typical eyes vs disparity bound {0, 2, 4, 8, 16}."""

    _run("disparity-sweep", config, out, seed, jobs)


@main.command("bus-size")
@common_options
def bus_size(config, out, seed, jobs) -> None:
    """ZS+-0 typical eyes across 1x36, 2x20, 4x12 group layouts."""

    _run("bus-size", config, out, seed, jobs)


@main.command("rate-sweep")
@common_options
def rate_sweep(config, out, seed, jobs) -> None:
    """Worst-case eyes vs data rate, 233 Mbps to 16 Gbps."""

    _run("rate-sweep", config, out, seed, jobs)


@main.group()
def codebook() -> None:
    """Build, export, and re-import lookup-table codebooks."""


@codebook.command("export")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--data-bits", type=int, required=True)
@click.option("--width", type=int, required=True)
@click.option("--disparity", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--mode",
    type=click.Choice(["enumerated", "sampled"]),
    default="enumerated",
    show_default=True,
)
def codebook_export(path, data_bits, width, disparity, seed, mode) -> None:
    """Build a codebook and write it to PATH."""

    try:
        book = build_codebook(data_bits, width, DisparityBound(disparity), seed=seed, mode=mode)
        save_codebook(book, path)
    except (ConfigError, DomainError, ValueError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ZeroSumError as exc:
        click.echo(f"codebook build failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(f"wrote {2 ** data_bits} x {width}-bit words to {path}")


@codebook.command("import")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def codebook_import(path) -> None:
    """Validate a codebook file and print its header facts."""

    try:
        book = load_codebook(path)
    except (ZeroSumError, ValueError) as exc:
        click.echo(f"invalid codebook: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(
        f"ok: {2 ** book.data_bits} entries, width {book.width}, "
        f"disparity bound {book.disparity_bound}"
    )


if __name__ == "__main__":
    main()
