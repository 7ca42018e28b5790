"""Shared test fixtures for aiwashing-cli tests."""

from pathlib import Path
from typing import NamedTuple

import pytest
from typer.testing import CliRunner

from aiwashing.datagen import BundlePaths, TruthConfig, generate, write_bundle
from aiwashing_cli.config import RunConfig, load_config
from aiwashing_cli.pipeline import RunManifest, run_pipeline

SMALL_DATAGEN = """
[datagen]
n_households = 1500
aux_factor = 2
iv_households = 1500

[bootstrap]
reps = 100

[simulation]
sensitivity_reps = 10
"""

ONLY_VALIDATE = """
[stages]
index = false
fit = false
mediate = false
bootstrap = false
moderate = false
iv = false
simulate = false
robustness = false
"""


def write_config(directory: Path, body: str, name: str = "run.toml") -> Path:
    """Helper to write a TOML config file and return its path."""
    path = directory / name
    path.write_text(body, encoding="utf-8")
    return path


def inputs_block(paths: BundlePaths, *, households: Path | None = None) -> str:
    """Helper to render an [inputs] table pointing at a written bundle."""
    return "\n".join(
        [
            "[inputs]",
            f'lexicon = "{paths.lexicon.as_posix()}"',
            f'corpus_dir = "{paths.corpus_dir.as_posix()}"',
            f'firms_csv = "{paths.firms_csv.as_posix()}"',
            f'households_csv = "{(households or paths.households_csv).as_posix()}"',
            f'usage_csv = "{paths.usage_csv.as_posix()}"',
            f'platforms_csv = "{paths.platforms_csv.as_posix()}"',
            "",
        ]
    )


class FullRun(NamedTuple):
    config: RunConfig
    manifest: RunManifest


@pytest.fixture
def runner() -> CliRunner:
    """Shared runner with colors disabled for consistent CI output."""
    return CliRunner(env={"NO_COLOR": "1", "TERM": "dumb"})


@pytest.fixture(scope="session")
def bundle(tmp_path_factory: pytest.TempPathFactory) -> BundlePaths:
    """A small synthetic bundle written once per session."""
    config = TruthConfig(n_households=1500, aux_factor=2, iv_households=1500)
    return write_bundle(generate(config, seed=11), tmp_path_factory.mktemp("bundle"))


@pytest.fixture(scope="session")
def full_run(tmp_path_factory: pytest.TempPathFactory) -> FullRun:
    """Every stage on a small generated bundle."""
    root = tmp_path_factory.mktemp("full")
    path = write_config(root, "seed = 7\n" + SMALL_DATAGEN)
    config = load_config(path, out_dir=root / "out")
    return FullRun(config, run_pipeline(config))
