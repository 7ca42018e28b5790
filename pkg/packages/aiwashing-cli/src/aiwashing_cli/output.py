"""Shared options, logging setup and run helpers for CLI commands."""

import logging
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Annotated, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from aiwashing import StageStatus, set_default_threads
from aiwashing.exceptions import InvalidSpec

from .config import RunConfig, load_config
from .pipeline import EXIT_VALIDATION, RunManifest, run_pipeline

ConfigOption = Annotated[
    Optional[Path],
    typer.Option(
        "--config",
        "-c",
        help="Run configuration (TOML)",
        exists=True,
        dir_okay=False,
    ),
]

SeedOption = Annotated[
    Optional[int],
    typer.Option(
        "--seed",
        min=0,
        help="Master seed for data generation, bootstrap and sensitivity draws",
    ),
]

OutOption = Annotated[
    Optional[Path],
    typer.Option(
        "--out",
        "-o",
        envvar="AIWASHING_OUT",
        help="Output directory",
    ),
]

ThreadsOption = Annotated[
    Optional[int],
    typer.Option(
        "--threads",
        "-t",
        min=1,
        help="Worker cap; results do not depend on it",
    ),
]

VerboseOption = Annotated[
    int,
    typer.Option(
        "--verbose",
        "-v",
        count=True,
        help="-v for progress, -vv for debug detail",
    ),
]

console = Console()
err_console = Console(stderr=True)

STATUS_STYLES = {
    StageStatus.OK: "green",
    StageStatus.FAILED: "red",
    StageStatus.SKIPPED: "yellow",
}


def setup_logging(verbose: int) -> None:
    """Route library logging through rich on stderr."""
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def build_config(
    config: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    threads: Optional[int],
    *,
    datagen_default: bool = False,
) -> RunConfig:
    """Load the config; malformed or invalid files exit with code 2."""
    try:
        run_config = load_config(
            config, seed=seed, out_dir=out, threads=threads, datagen_default=datagen_default
        )
    except (OSError, tomllib.TOMLDecodeError) as exc:
        console.print(f"[red]Error:[/red] Cannot read config: {escape(str(exc))}")
        raise typer.Exit(EXIT_VALIDATION) from exc
    except ValidationError as exc:
        console.print(f"[red]Error:[/red] Invalid config:\n{escape(str(exc))}")
        raise typer.Exit(EXIT_VALIDATION) from exc
    except InvalidSpec as exc:
        console.print(f"[red]Error:[/red] {escape(str(exc))}")
        raise typer.Exit(EXIT_VALIDATION) from exc
    set_default_threads(run_config.threads)
    return run_config


def create_manifest_table(manifest: RunManifest) -> Table:
    """Per-stage status table."""
    table = Table(title=f"Run {manifest.config_hash[:12]}", show_header=True, header_style="bold cyan")
    table.add_column("Stage", width=12)
    table.add_column("Status", width=8)
    table.add_column("Seconds", width=8, justify="right")
    table.add_column("Note", max_width=60)
    for record in manifest.stages:
        style = STATUS_STYLES[record.status]
        table.add_row(
            record.name,
            f"[{style}]{record.status}[/{style}]",
            f"{record.seconds:.2f}" if record.status is StageStatus.OK else "-",
            escape(record.error),
        )
    return table


def execute(run_config: RunConfig, stages: Optional[Sequence[str]] = None) -> RunManifest:
    """Run stages, print the summary and exit non-zero on any failure."""
    try:
        manifest = run_pipeline(run_config, stages)
    except InvalidSpec as exc:
        console.print(f"[red]Error:[/red] {escape(str(exc))}")
        raise typer.Exit(EXIT_VALIDATION) from exc

    console.print(create_manifest_table(manifest))
    for record in manifest.failed:
        console.print(f"[red]Error:[/red] Stage {record.name} failed: {escape(record.error)}")
    if manifest.exit_code:
        raise typer.Exit(manifest.exit_code)
    console.print(f"[green]Outputs:[/green] {run_config.out_dir}")
    return manifest
