"""Validate command for input schema checks."""

import typer

from ..output import (
    ConfigOption,
    OutOption,
    SeedOption,
    ThreadsOption,
    VerboseOption,
    build_config,
    console,
    execute,
    setup_logging,
)
from ..pipeline import read_csv

app = typer.Typer()


@app.command()
def validate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Check every input table and write the cleaned household table."""
    setup_logging(verbose)
    run_config = build_config(config, seed, out, threads)
    execute(run_config, ["validate"])

    frame = read_csv(run_config.out_dir / "validation.csv")
    violations = int((frame["kind"] == "violation").sum())
    dropped = int(frame.loc[frame["kind"] == "dropped", "count"].sum())
    style = "yellow" if violations else "green"
    console.print(f"[{style}]{violations} violations[/{style}], {dropped} rows excluded")
