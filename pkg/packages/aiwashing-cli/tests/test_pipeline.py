"""Tests for stage orchestration and output files."""

import json
import math
from pathlib import Path

import pandas as pd
import pytest
from conftest import ONLY_VALIDATE, SMALL_DATAGEN, FullRun, inputs_block, write_config
from pytest_mock import MockerFixture

from aiwashing import StageStatus
from aiwashing.datagen import BundlePaths
from aiwashing.exceptions import InsufficientData, InvalidSpec
from aiwashing_cli.config import load_config
from aiwashing_cli.pipeline import (
    MANIFEST,
    REPORT_FILES,
    STAGE_NAMES,
    read_csv,
    run_pipeline,
    write_csv,
)

MOCK_FIT_MEDIATION = "aiwashing_cli.pipeline.fit_mediation"


def statuses(manifest) -> dict[str, StageStatus]:
    return {s.name: s.status for s in manifest.stages}


class TestCsvFiles:
    """Tests for the shared CSV writer and reader."""

    def test_header_and_undefined(self, tmp_path: Path) -> None:
        """The hash comes first and NaN is written as 'undefined'."""
        path = write_csv(pd.DataFrame({"a": [1.5, math.nan]}), tmp_path / "x.csv", "abc")

        lines = path.read_text(encoding="utf-8").splitlines()
        frame = read_csv(path)

        assert lines == ["# config_hash=abc", "a", "1.5", "undefined"]
        assert math.isnan(frame.loc[1, "a"])

    def test_float_format(self, tmp_path: Path) -> None:
        path = write_csv(pd.DataFrame({"a": [1 / 3]}), tmp_path / "x.csv", "abc")

        assert path.read_text(encoding="utf-8").splitlines()[2] == "0.3333333333"


class TestFullRun:
    """Every stage on a small generated bundle."""

    def test_every_stage_ok(self, full_run: FullRun) -> None:
        manifest = full_run.manifest

        assert not manifest.failed, [(s.name, s.error) for s in manifest.failed]
        assert [s.name for s in manifest.stages] == list(STAGE_NAMES)
        assert manifest.exit_code == 0

    def test_seven_report_files(self, full_run: FullRun) -> None:
        """Each report file starts with the config hash line."""
        out = full_run.config.out_dir
        header = f"# config_hash={full_run.config.config_hash()}"

        for name in REPORT_FILES:
            path = out / name
            assert path.exists(), name
            assert path.read_text(encoding="utf-8").splitlines()[0] == header

    def test_manifest_file(self, full_run: FullRun) -> None:
        data = json.loads((full_run.config.out_dir / MANIFEST).read_text(encoding="utf-8"))

        assert data["config_hash"] == full_run.config.config_hash()
        assert set(REPORT_FILES) <= set(data["outputs"])
        assert "bundle/households.csv" in data["outputs"]
        assert {"households_csv", "corpus_dir", "truth"} <= set(data["inputs"])
        assert {s["status"] for s in data["stages"]} == {"ok"}

    def test_baseline_has_six_models(self, full_run: FullRun) -> None:
        frame = read_csv(full_run.config.out_dir / "baseline.csv")

        assert sorted(frame["model"].unique()) == [f"({i})" for i in range(1, 7)]
        assert set(frame.loc[frame["model"] == "(6)", "kind"]) == {"ordered_logit"}

    def test_mediation_has_both_panels(self, full_run: FullRun) -> None:
        frame = read_csv(full_run.config.out_dir / "mediation.csv")

        assert set(frame["panel"]) == {"A", "B"}
        assert (frame.loc[frame["panel"] == "B", "ci_lo"] <= frame.loc[frame["panel"] == "B", "ci_hi"]).all()

    def test_indexed_households(self, full_run: FullRun) -> None:
        """The index and its alternatives are attached to every household."""
        frame = read_csv(full_run.config.out_dir / "households_indexed.csv")

        for column in ("ai_washing", "ai_washing_raw", "ai_washing_equal_weights", "ai_washing_pooled"):
            assert frame[column].notna().all(), column

    def test_trend_written(self, full_run: FullRun) -> None:
        trend = read_csv(full_run.config.out_dir / "trend.csv").set_index("statistic")
        series = read_csv(full_run.config.out_dir / "trend_series.csv")

        assert trend.loc["correlation", "value"] == pytest.approx(-0.76, abs=0.1)
        assert list(series.columns) == ["year", "mean_index", "usage_rate"]

    def test_oracle_checks_estimates(self, full_run: FullRun) -> None:
        frame = read_csv(full_run.config.out_dir / "oracle.csv").set_index("parameter")

        assert frame.loc["mediation.a1", "status"] == "checked"
        assert frame.loc["iv.effect", "status"] == "checked"
        assert "moderation.interaction" in frame.index

    def test_identical_outputs_across_threads(
        self, full_run: FullRun, tmp_path: Path
    ) -> None:
        """A rerun with more workers writes byte-identical files."""
        path = write_config(tmp_path, "seed = 7\n" + SMALL_DATAGEN)
        config = load_config(path, out_dir=tmp_path / "out", threads=2)

        manifest = run_pipeline(config)

        assert manifest.config_hash == full_run.manifest.config_hash
        assert manifest.outputs == full_run.manifest.outputs


class TestStageSelection:
    """Tests for toggles, explicit stage lists and seed checks."""

    def test_bootstrap_disabled(self, bundle: BundlePaths, tmp_path: Path) -> None:
        """Without the bootstrap stage the mediation report has no Panel B."""
        body = inputs_block(bundle) + ONLY_VALIDATE.replace("mediate = false", "mediate = true")
        config = load_config(write_config(tmp_path, body), out_dir=tmp_path / "out")

        manifest = run_pipeline(config)
        frame = read_csv(tmp_path / "out" / "mediation.csv")

        assert set(frame["panel"]) == {"A"}
        assert statuses(manifest)["mediate"] is StageStatus.OK
        bootstrap = next(s for s in manifest.stages if s.name == "bootstrap")
        assert bootstrap.status is StageStatus.SKIPPED
        assert bootstrap.error == "disabled"

    def test_failed_stage_skips_dependents(
        self, bundle: BundlePaths, mocker: MockerFixture, tmp_path: Path
    ) -> None:
        """A failing mediation skips the bootstrap; independent stages still run."""
        mocker.patch(MOCK_FIT_MEDIATION, side_effect=InsufficientData("forced"))
        body = (
            "seed = 1\n"
            + inputs_block(bundle)
            + ONLY_VALIDATE.replace("fit = false", "fit = true")
            .replace("mediate = false", "mediate = true")
            .replace("bootstrap = false", "bootstrap = true")
        )
        body += "[bootstrap]\nreps = 100\n"
        config = load_config(write_config(tmp_path, body), out_dir=tmp_path / "out")

        manifest = run_pipeline(config)
        result = statuses(manifest)

        assert result["mediate"] is StageStatus.FAILED
        assert result["bootstrap"] is StageStatus.SKIPPED
        assert result["fit"] is StageStatus.OK
        assert manifest.exit_code == 3
        assert (tmp_path / "out" / MANIFEST).exists()

    def test_validation_failure_exit_code(self, bundle: BundlePaths, tmp_path: Path) -> None:
        """Too many bad rows fail validation with exit code 2 and skip the rest."""
        frame = pd.read_csv(bundle.households_csv)
        frame.loc[:199, "knowledge_exclusion"] = 8
        households = tmp_path / "households.csv"
        frame.to_csv(households, index=False)
        body = inputs_block(bundle, households=households) + "[stages]\nbootstrap = false\nsimulate = false\n"
        config = load_config(write_config(tmp_path, body), out_dir=tmp_path / "out")

        manifest = run_pipeline(config)
        result = statuses(manifest)

        assert result["validate"] is StageStatus.FAILED
        assert result["index"] is StageStatus.SKIPPED
        assert result["fit"] is StageStatus.SKIPPED
        assert manifest.exit_code == 2
        assert (tmp_path / "out" / "validation.csv").exists()

    def test_explicit_stages_ignore_toggles(self, bundle: BundlePaths, tmp_path: Path) -> None:
        body = inputs_block(bundle) + ONLY_VALIDATE
        config = load_config(write_config(tmp_path, body), out_dir=tmp_path / "out")

        run_pipeline(config, ["validate"])
        manifest = run_pipeline(config, ["fit"])

        assert [s.name for s in manifest.stages] == ["fit"]
        assert statuses(manifest)["fit"] is StageStatus.OK

    def test_seed_required(self, tmp_path: Path) -> None:
        """Bootstrap without a seed is refused before anything runs."""
        config = load_config(out_dir=tmp_path / "out")

        with pytest.raises(InvalidSpec, match="seed"):
            run_pipeline(config)
        assert not (tmp_path / "out").exists()

    def test_unknown_stage(self, tmp_path: Path) -> None:
        config = load_config(out_dir=tmp_path / "out")

        with pytest.raises(InvalidSpec, match="Unknown stages"):
            run_pipeline(config, ["fitting"])
