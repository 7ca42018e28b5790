"""Run command: every enabled stage in order."""

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
def run(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Run the whole pipeline.

    A failed stage skips the stages that depend on it; the others still run.
    """
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads))
