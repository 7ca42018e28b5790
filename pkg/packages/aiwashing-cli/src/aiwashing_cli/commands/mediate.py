"""Mediate command: path coefficients and bootstrap indirect effects."""

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
def mediate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Decompose the effect of AI washing through knowledge and risk exclusion."""
    setup_logging(verbose)
    run_config = build_config(config, seed, out, threads)
    stages = ["mediate", "bootstrap"] if run_config.stages.bootstrap else ["mediate"]
    execute(run_config, stages)
