"""Simulate command for counterfactual policy scenarios."""

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
def simulate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Run the policy scenarios, cost-benefit and sensitivity analysis."""
    setup_logging(verbose)
    execute(build_config(config, seed, out, threads), ["simulate"])
