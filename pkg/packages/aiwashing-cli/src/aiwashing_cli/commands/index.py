"""Index command: talk, walk and washing scores."""

import typer

from ..output import (
    ConfigOption,
    OutOption,
    SeedOption,
    ThreadsOption,
    VerboseOption,
    build_config,
    execute,
    setup_logging,
)

app = typer.Typer()


@app.command()
def index(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Build the firm-year AI washing index and attach it to households."""
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads), ["index"])
