"""Tests for run configuration loading."""

import tomllib
from pathlib import Path

import pytest
from conftest import write_config
from pydantic import ValidationError

from aiwashing import Standardization
from aiwashing.exceptions import InvalidSpec
from aiwashing_cli.config import DEFAULT_OUT_DIR, load_config


class TestLoadConfig:
    """Tests for reading and validating TOML configs."""

    def test_defaults_without_file(self) -> None:
        """No file gives the default bindings and settings."""
        config = load_config()

        assert config.seed is None
        assert config.out_dir == DEFAULT_OUT_DIR
        assert config.threads == 1
        assert config.datagen is None
        assert config.bindings.treatment == "ai_washing"
        assert config.bindings.mediators == ("knowledge_exclusion", "risk_exclusion")
        assert len(config.bindings.controls) == 13
        assert config.bootstrap.reps == 500
        assert config.simulation.sensitivity_reps == 1000

    def test_sections_are_read(self, tmp_path: Path) -> None:
        """Values from every section reach the model."""
        path = write_config(
            tmp_path,
            'seed = 3\n[index]\nstandardization = "pooled"\n[bootstrap]\nreps = 200\n',
        )

        config = load_config(path)

        assert config.seed == 3
        assert config.index.standardization is Standardization.POOLED
        assert config.bootstrap.reps == 200

    def test_relative_inputs_follow_config_dir(self, tmp_path: Path) -> None:
        """Relative input paths are taken from the config file's directory."""
        path = write_config(tmp_path, '[inputs]\nhouseholds_csv = "data/households.csv"\n')

        config = load_config(path)

        assert config.inputs.households_csv == tmp_path / "data" / "households.csv"

    def test_flags_override_file(self, tmp_path: Path) -> None:
        """--seed, --out and --threads beat the file."""
        path = write_config(tmp_path, 'seed = 3\nthreads = 2\nout_dir = "a"\n')

        config = load_config(path, seed=9, out_dir=tmp_path / "b", threads=4)

        assert config.seed == 9
        assert config.out_dir == tmp_path / "b"
        assert config.threads == 4

    def test_unknown_key_rejected(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, "[stages]\nfitt = true\n")

        with pytest.raises(ValidationError):
            load_config(path)

    def test_head_controls_must_be_controls(self, tmp_path: Path) -> None:
        """Head-of-household controls are a subset of the full set."""
        path = write_config(
            tmp_path, '[bindings]\ncontrols = ["age"]\nhead_controls = ["age", "gender"]\n'
        )

        with pytest.raises(ValidationError, match="head_controls"):
            load_config(path)

    def test_treatment_cannot_be_control(self, tmp_path: Path) -> None:
        path = write_config(
            tmp_path,
            '[bindings]\ncontrols = ["age", "ai_washing"]\nhead_controls = ["age"]\n',
        )

        with pytest.raises(ValidationError, match="overlap"):
            load_config(path)

    def test_bootstrap_reps_floor(self, tmp_path: Path) -> None:
        """Fewer than 100 bootstrap replicates is refused."""
        path = write_config(tmp_path, "[bootstrap]\nreps = 50\n")

        with pytest.raises(ValidationError):
            load_config(path)

    def test_unknown_datagen_setting(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, "[datagen]\nn_household = 900\n")

        with pytest.raises(ValidationError, match="n_household"):
            load_config(path)

    def test_unknown_scenario_preset(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, '[simulation]\nscenarios = ["S9"]\n')

        with pytest.raises(ValidationError):
            load_config(path)

    def test_custom_scenario_and_costs(self, tmp_path: Path) -> None:
        """Scenario tables and cost overrides become domain objects."""
        path = write_config(
            tmp_path,
            "[simulation]\n"
            'scenarios = ["S1", { preset = "S2", label = "S2b", knowledge_multiplier = 0.5 }]\n'
            "costs = { training_cost_per_farmer = 80.0 }\n",
        )

        config = load_config(path)
        specs = config.simulation.scenario_specs()

        assert [s.label for s in specs] == ["S1", "S2b"]
        assert specs[1].knowledge_multiplier == 0.5
        assert config.simulation.cost_model().training_cost_per_farmer == 80.0

    def test_malformed_toml(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, "seed = = 3\n")

        with pytest.raises(tomllib.TOMLDecodeError):
            load_config(path)


class TestRunConfig:
    """Tests for derived configuration values."""

    def test_datagen_binds_inputs_to_bundle(self, tmp_path: Path) -> None:
        """With [datagen] the inputs are the bundle under the output directory."""
        config = load_config(out_dir=tmp_path, datagen_default=True)

        inputs = config.resolved_inputs()

        assert config.datagen == {}
        assert inputs.households_csv == tmp_path / "bundle" / "households.csv"
        assert inputs.truth == tmp_path / "bundle" / "truth.txt"
        assert inputs.corpus_dir == tmp_path / "bundle" / "corpus"

    def test_hash_ignores_threads_and_out_dir(self, tmp_path: Path) -> None:
        a = load_config(seed=1, threads=1, out_dir=tmp_path / "a")
        b = load_config(seed=1, threads=8, out_dir=tmp_path / "b")

        assert a.config_hash() == b.config_hash()

    def test_hash_tracks_seed(self) -> None:
        assert load_config(seed=1).config_hash() != load_config(seed=2).config_hash()

    def test_seed_required_for_stochastic_stages(self) -> None:
        """Bootstrap draws need a seed; deterministic stages do not."""
        config = load_config()

        config.require_seed(["validate", "fit"])
        with pytest.raises(InvalidSpec, match="seed"):
            config.require_seed(["mediate", "bootstrap"])
