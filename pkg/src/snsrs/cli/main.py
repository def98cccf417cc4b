"""CLI main entry point using Typer."""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd
import typer
from rich.console import Console
from rich.logging import RichHandler

from snsrs import __version__
from snsrs.config import (
    ConfigurationError,
    RunConfig,
    config_from_values,
    config_values,
    load_config,
    preset_config,
    serialize_config,
)
from snsrs.config.settings import (
    ASYMPTOTIC_ROWS,
    DEFAULT_BUDGET,
    DEFAULT_LOG_LEVEL,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    DEVICE_ROWS,
    TABLE2_DISTANCES_KM,
    TABLE2_MODES,
    TABLE2_ROW,
)
from snsrs.exporter import ResultExporter, RunManifest, load_manifest
from snsrs.keyrate import comparison_frame, evaluate, results_frame
from snsrs.model import counting_rates
from snsrs.optimizer import OptimizationProblem, optimize, scan, trace_frame
from snsrs.oracle import compare, report_frame, simulate

app = typer.Typer(
    name="snsrs",
    help="Key rates of sending-or-not-sending twin-field QKD with redundant space",
    add_completion=False,
)

# Standard output carries CSV only
console = Console(stderr=True)
logger = logging.getLogger(__name__)

COMMANDS = ("rate", "scan", "validate", "table2")


@dataclass
class Outcome:
    table: pd.DataFrame
    budget_spent: float = 0.0
    trace: pd.DataFrame | None = None
    exit_code: int = 0


def parse_distances(specs: list[str]) -> list[float]:
    """Expand ``--distance-km`` values; ``START:STOP:STEP`` includes STOP.

    Raises:
        ValueError: On malformed or negative values
    """
    distances: list[float] = []
    for spec in specs:
        parts = spec.split(":")
        try:
            numbers = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"invalid distance {spec!r}") from None
        if len(numbers) == 1:
            distances.append(numbers[0])
        elif len(numbers) == 3:
            start, stop, step = numbers
            if step <= 0.0 or stop < start:
                raise ValueError(f"invalid distance range {spec!r}")
            count = int(round((stop - start) / step)) + 1
            distances.extend(round(start + i * step, 9) for i in range(count))
        else:
            raise ValueError(f"invalid distance {spec!r}; use KM or START:STOP:STEP")
    if any(d < 0.0 for d in distances):
        raise ValueError("distances must be >= 0")
    return sorted(set(distances))


def _load(config_path: Path | None, row: str | None) -> RunConfig:
    if config_path is not None and row is not None:
        raise ValueError("give either --config or --row, not both")
    if config_path is not None:
        if not config_path.exists():
            raise FileNotFoundError(f"Config not found: {config_path}")
        return load_config(config_path)
    if row is None:
        raise ValueError("no configuration given; use --config or --row")
    if row.upper() not in DEVICE_ROWS:
        raise ValueError(f"unknown device row {row!r}; choose from {', '.join(DEVICE_ROWS)}")
    if row.upper() in ASYMPTOTIC_ROWS:
        logger.warning(f"Row {row.upper()} is the asymptotic row; use --asymptotic")
    return preset_config(row)


def _run_rate(config: RunConfig, options: dict[str, Any]) -> Outcome:
    base = config.with_modes(options["m_values"][0]).with_distance(options["distances"][0])
    if options["budget"] > 0:
        problem = OptimizationProblem(base=base, asymptotic=options["asymptotic"])
        base = optimize(problem, options["budget"], options["seed"]).config
    result = evaluate(base, asymptotic=options["asymptotic"])
    return Outcome(results_frame([result]), result.budget_spent)


def _run_scan(config: RunConfig, options: dict[str, Any]) -> Outcome:
    points = scan(
        options["distances"],
        options["m_values"],
        config,
        budget=options["budget"],
        seed=options["seed"],
        warm_start=options["warm_start"],
        workers=options["workers"],
        asymptotic=options["asymptotic"],
    )
    results = [p.result for p in points]
    return Outcome(
        results_frame(results),
        budget_spent=sum(r.budget_spent for r in results),
        trace=trace_frame(points),
    )


def _run_validate(config: RunConfig, options: dict[str, Any]) -> Outcome:
    run = config.with_distance(options["distances"][0]).with_protocol(n_windows=options["trials"])
    observed = simulate(
        run.protocol, run.channel, options["trials"], options["seed"], options["workers"]
    )
    report = compare(observed, counting_rates(run.protocol, run.channel), options["sigma"])
    for deviation in report:
        logger.info(
            f"{deviation.quantity} {deviation.window_class} mode {deviation.mode}: "
            f"z = {deviation.z:.2f}"
        )
    return Outcome(report_frame(report), exit_code=1 if report else 0)


def _run_table2(config: RunConfig, options: dict[str, Any]) -> Outcome:
    points = scan(
        list(TABLE2_DISTANCES_KM),
        list(TABLE2_MODES),
        config,
        budget=options["budget"],
        seed=options["seed"],
        warm_start=True,
        workers=options["workers"],
    )
    results = [p.result for p in points]
    return Outcome(
        comparison_frame(results, config),
        budget_spent=sum(r.budget_spent for r in results),
        trace=trace_frame(points),
    )


RUNNERS = {
    "rate": _run_rate,
    "scan": _run_scan,
    "validate": _run_validate,
    "table2": _run_table2,
}


def _emit(outcome: Outcome, manifest: RunManifest, out: Path | None) -> None:
    exporter = ResultExporter()
    if out is None:
        typer.echo(exporter.render(outcome.table), nl=False)
        typer.echo(manifest.to_json(), nl=False, err=True)
        return
    written = exporter.write_run(outcome.table, manifest, out, outcome.trace)
    for path in written:
        console.print(f"[green]✓[/green] Wrote {path}")


def _execute(
    command: str,
    load: Callable[[], RunConfig],
    options: dict[str, Any],
    out: Path | None,
) -> None:
    """Run a command, write its table and manifest, and map errors to exit codes."""
    try:
        config: RunConfig = load()
        if options.get("distances") is None:
            options["distances"] = [config.channel.length_km]
        if options.get("m_values") is None:
            options["m_values"] = [config.protocol.m]
        if console.is_terminal:
            from snsrs.cli.banner import print_run_panel

            print_run_panel(console, command, config, options, options["seed"])

        outcome = RUNNERS[command](config, options)
        manifest = RunManifest(
            command=command,
            config=config_values(config),
            options=options,
            seed=options["seed"],
            tool_version=__version__,
            budget_spent=outcome.budget_spent,
        )
        _emit(outcome, manifest, out)
    except ConfigurationError as e:
        for violation in e.violations:
            console.print(f"[red]✗[/red] {violation}", style="bold")
        raise typer.Exit(code=2)
    except (FileNotFoundError, ValueError) as e:
        console.print(f"[red]✗[/red] {e}", style="bold")
        raise typer.Exit(code=2)
    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        console.print(f"[red]✗[/red] Error: {e}", style="bold")
        raise typer.Exit(code=1)

    if outcome.exit_code:
        raise typer.Exit(code=outcome.exit_code)


def _configure_logging(level: str) -> None:
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise typer.BadParameter(f"unknown log level {level!r}")
    logging.basicConfig(
        level=numeric,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


@app.callback()
def callback(
    log_level: str = typer.Option(
        DEFAULT_LOG_LEVEL,
        "--log-level",
        "-l",
        help="Logging level (DEBUG/INFO/WARNING/ERROR)",
    ),
) -> None:
    """Key rates of sending-or-not-sending twin-field QKD with redundant space."""
    _configure_logging(log_level)


ConfigOption = typer.Option(None, "--config", "-c", help="Configuration file")
RowOption = typer.Option(None, "--row", help="Device preset row (A/B/C/D) instead of --config")
SeedOption = typer.Option(DEFAULT_SEED, "--seed", help="Root seed")
WorkersOption = typer.Option(DEFAULT_WORKERS, "--workers", min=1, help="Worker processes")
OutOption = typer.Option(None, "--out", "-o", help="Output CSV (default: standard output)")


@app.command()
def rate(
    config: Path | None = ConfigOption,
    row: str | None = RowOption,
    distance_km: float | None = typer.Option(
        None, "--distance-km", min=0.0, help="Total Alice-Bob distance (default: L_km)"
    ),
    m: int | None = typer.Option(None, "--m", min=1, help="Number of modes (default: m)"),
    asymptotic: bool = typer.Option(False, "--asymptotic", help="Asymptotic analysis"),
    budget: int = typer.Option(
        0, "--budget", min=0, help="Optimize with this many evaluations first (0: as configured)"
    ),
    seed: int = SeedOption,
    out: Path | None = OutOption,
) -> None:
    """Key rate at one distance and mode count."""
    options: dict[str, Any] = {
        "distances": None if distance_km is None else [distance_km],
        "m_values": None if m is None else [m],
        "asymptotic": asymptotic,
        "budget": budget,
        "seed": seed,
    }
    _execute("rate", lambda: _load(config, row), options, out)


@app.command("scan")
def scan_command(
    config: Path | None = ConfigOption,
    row: str | None = RowOption,
    distance_km: list[str] | None = typer.Option(
        None, "--distance-km", help="Distance or START:STOP:STEP range in km (repeatable)"
    ),
    m: list[int] | None = typer.Option(None, "--m", min=1, help="Number of modes (repeatable)"),
    asymptotic: bool = typer.Option(False, "--asymptotic", help="Asymptotic analysis"),
    budget: int = typer.Option(
        DEFAULT_BUDGET, "--budget", min=1, help="Objective evaluations per point"
    ),
    warm_start: bool = typer.Option(
        True, "--warm-start/--cold-start", help="Start each distance from the previous optimum"
    ),
    seed: int = SeedOption,
    workers: int = WorkersOption,
    out: Path | None = OutOption,
) -> None:
    """Optimized key rates over distances and mode counts."""
    if not m:
        console.print("[red]✗[/red] no modes requested", style="bold")
        raise typer.Exit(code=2)
    try:
        distances = parse_distances(distance_km) if distance_km else None
    except ValueError as e:
        console.print(f"[red]✗[/red] {e}", style="bold")
        raise typer.Exit(code=2)

    options: dict[str, Any] = {
        "distances": distances,
        "m_values": list(dict.fromkeys(m)),
        "asymptotic": asymptotic,
        "budget": budget,
        "warm_start": warm_start,
        "seed": seed,
        "workers": workers,
    }
    _execute("scan", lambda: _load(config, row), options, out)


@app.command()
def validate(
    config: Path | None = ConfigOption,
    row: str | None = RowOption,
    distance_km: float | None = typer.Option(
        None, "--distance-km", min=0.0, help="Total Alice-Bob distance (default: L_km)"
    ),
    trials: int = typer.Option(10**7, "--trials", min=1, help="Simulated time windows"),
    sigma: float = typer.Option(4.0, "--sigma", min=0.0, help="Flag bins beyond this |z|"),
    seed: int = SeedOption,
    workers: int = WorkersOption,
    out: Path | None = OutOption,
) -> None:
    """Compare the Monte Carlo oracle against the analytic model."""
    options: dict[str, Any] = {
        "distances": None if distance_km is None else [distance_km],
        "trials": trials,
        "sigma": sigma,
        "seed": seed,
        "workers": workers,
    }
    _execute("validate", lambda: _load(config, row), options, out)


@app.command()
def table2(
    budget: int = typer.Option(
        DEFAULT_BUDGET, "--budget", min=1, help="Objective evaluations per point"
    ),
    seed: int = SeedOption,
    workers: int = WorkersOption,
    out: Path | None = OutOption,
) -> None:
    """Reproduce the published three-distance comparison on device row C."""
    options: dict[str, Any] = {"budget": budget, "seed": seed, "workers": workers}
    _execute("table2", lambda: preset_config(TABLE2_ROW), options, out)


@app.command("init-config")
def init_config(
    row: str = typer.Option(..., "--row", help="Device preset row (A/B/C/D)"),
    distance_km: float = typer.Option(0.0, "--distance-km", min=0.0, help="L_km to write"),
    m: int = typer.Option(2, "--m", min=1, help="Number of modes to write"),
    out: Path | None = OutOption,
) -> None:
    """Write a ready configuration file for a device row."""
    if row.upper() not in DEVICE_ROWS:
        console.print(
            f"[red]✗[/red] unknown device row {row!r}; choose from {', '.join(DEVICE_ROWS)}",
            style="bold",
        )
        raise typer.Exit(code=2)

    text = serialize_config(preset_config(row, length_km=distance_km, m=m))
    if out is None:
        typer.echo(text, nl=False)
        return
    try:
        ResultExporter().write_text(text, out)
    except FileNotFoundError as e:
        console.print(f"[red]✗[/red] {e}", style="bold")
        raise typer.Exit(code=2)
    console.print(f"[green]✓[/green] Wrote {out}")


@app.command()
def replay(
    manifest: Path = typer.Argument(..., help="Manifest written by a previous run"),
    out: Path | None = OutOption,
) -> None:
    """Rerun the command recorded in a manifest."""
    try:
        recorded = load_manifest(manifest)
        if recorded.command not in COMMANDS:
            raise ValueError(f"cannot replay command {recorded.command!r}")
    except (FileNotFoundError, ValueError) as e:
        console.print(f"[red]✗[/red] {e}", style="bold")
        raise typer.Exit(code=2)

    options = dict(recorded.options)
    options["seed"] = recorded.seed
    _execute(recorded.command, lambda: config_from_values(recorded.config), options, out)


def main() -> None:
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
