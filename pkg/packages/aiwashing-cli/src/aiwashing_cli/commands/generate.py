"""Generate command for the synthetic data bundle."""

import typer

from ..config import BUNDLE_DIR
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

app = typer.Typer()


@app.command()
def generate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    threads: ThreadsOption = None,
    verbose: VerboseOption = 0,
) -> None:
    """Write a synthetic bundle with known true coefficients.

    Without a [datagen] block the default calibration is used.
    """
    setup_logging(verbose)
    run_config = build_config(config, seed, out, threads, datagen_default=True)
    execute(run_config, ["generate"])
    console.print(f"[green]Bundle:[/green] {run_config.out_dir / BUNDLE_DIR}")
