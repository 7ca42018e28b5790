"""Main CLI entry point for aiwashing."""

import typer

from .commands import (
    fit_app,
    generate_app,
    index_app,
    iv_app,
    mediate_app,
    moderate_app,
    run_app,
    simulate_app,
    validate_app,
)

app = typer.Typer(
    name="aiwashing",
    help="Measure AI washing on digital finance platforms and estimate its effect on household uptake",
    no_args_is_help=True,
)

app.add_typer(generate_app)
app.add_typer(validate_app)
app.add_typer(index_app)
app.add_typer(fit_app)
app.add_typer(mediate_app)
app.add_typer(moderate_app)
app.add_typer(iv_app)
app.add_typer(simulate_app)
app.add_typer(run_app)


def main() -> int:
    """Entry point for the CLI."""
    app()

    return 0
