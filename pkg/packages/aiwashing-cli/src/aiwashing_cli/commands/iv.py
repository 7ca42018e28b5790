"""IV command for the two-stage least squares check."""

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
def iv(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Estimate the instrumented effect of AI washing (2SLS)."""
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads), ["iv"])
