"""Moderate command: interaction, split samples and subgroup differences."""

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
def moderate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Estimate social capital moderation and the heterogeneity splits."""
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads), ["moderate"])
