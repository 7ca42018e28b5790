"""Fit command for the baseline regressions."""

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
def fit(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Fit the nested baseline logit and ordered logit specifications."""
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads), ["fit"])
