import math

import numpy as np
import pandas as pd
import pytest
from conftest import SMALL_CONFIG
from scipy import stats

from aiwashing.datagen import (
    CONTROL_COLUMNS,
    HOUSEHOLD_COLUMNS,
    TruthConfig,
    bundle_paths,
    gen_iv_sample,
    generate,
    oracle_report,
    read_truth,
    structural_self_test,
    write_bundle,
)
from aiwashing.exceptions import InvalidSpec
from aiwashing.glm import fit_model
from aiwashing.iv import IVSpec, fit_2sls
from aiwashing.mediation import MediationSpec, fit_mediation
from aiwashing.models import ModelKind
from aiwashing.moderation import ModerationSpec, fit_interaction
from aiwashing.washing_index import yearly_means

CONTROLS = tuple(CONTROL_COLUMNS)


Z95 = float(stats.norm.ppf(0.975))
COVERAGE_SEEDS = range(101, 121)


def within(estimate: float, se: float, truth: float, width: float = Z95) -> bool:
    return abs(estimate - truth) <= width * se


def recovered_estimates(households: pd.DataFrame) -> dict[str, tuple[float, float]]:
    """Helper to fit every planted household coefficient as ``name -> (estimate, se)``."""
    columns = ["ai_washing", *CONTROLS]
    estimates = {}
    for name, kind, outcome in (
        ("baseline.ai_washing", ModelKind.BINARY_LOGIT, "y1_use"),
        ("ordered.ai_washing", ModelKind.ORDERED_LOGIT, "y2_breadth"),
    ):
        fit = fit_model(households, outcome, columns, kind=kind)
        estimates[name] = (fit.coefficients["ai_washing"], fit.std_errors["ai_washing"])

    spec = MediationSpec("ai_washing", ("knowledge_exclusion", "risk_exclusion"), "y1_use", CONTROLS)
    dec = fit_mediation(households, spec)
    for path in ("a1", "a2", "b1", "b2", "c_prime"):
        estimates[f"mediation.{path}"] = (getattr(dec, path).coef, getattr(dec, path).se)

    fit = fit_interaction(households, ModerationSpec("ai_washing", "social_capital", "y1_use", CONTROLS))
    product = "ai_washing_x_social_capital"
    estimates["moderation.interaction"] = (fit.coefficients[product], fit.std_errors[product])
    return estimates


class TestTruthConfig:
    """Tests for generator settings validation."""

    def test_defaults_are_valid(self):
        """The default config builds and surveys the last year."""
        config = TruthConfig()

        assert config.survey_year == 2019
        assert config.social_capital_mean == pytest.approx(1.289 * 2.456)

    def test_rejects_small_sample(self):
        """Fewer than 500 households is refused."""
        with pytest.raises(InvalidSpec):
            TruthConfig(n_households=100)

    def test_rejects_mismatched_yearly_means(self):
        """Each year needs exactly one target mean."""
        with pytest.raises(InvalidSpec):
            TruthConfig(yearly_means=(0.1, 0.2))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidSpec):
            TruthConfig(a1=math.nan)

    def test_rejects_unknown_control_effect(self):
        with pytest.raises(InvalidSpec, match="unknown controls"):
            TruthConfig(control_effects={"shoe_size": 0.1})

    def test_from_mapping_converts_lists(self):
        """Mappings parsed from TOML carry lists; they become tuples."""
        config = TruthConfig.from_mapping({"years": [2018, 2019], "yearly_means": [0.1, 0.4]})

        assert config.years == (2018, 2019)
        assert hash(config) == hash(TruthConfig(years=(2018, 2019), yearly_means=(0.1, 0.4)))

    def test_from_mapping_unknown_key(self):
        with pytest.raises(InvalidSpec, match="Unknown datagen settings"):
            TruthConfig.from_mapping({"n_household": 900})

    def test_truth_values_products(self):
        """Indirect truths are products of their paths."""
        config = TruthConfig()
        truth = config.truth_values()

        assert truth["mediation.indirect_1"] == pytest.approx(0.348 * -0.432)
        assert truth["mediation.indirect_2"] == pytest.approx(0.312 * -0.487)


class TestFirmPanel:
    """Tests for the generated firm panel and platform series."""

    def test_panel_shape(self, small_bundle):
        """Every firm has a record and a document in every year."""
        firms = small_bundle.firms

        assert len(firms.records) == 18 * 4
        assert len(firms.documents) == 18 * 4
        assert firms.firm_ids == [f"P{i:02d}" for i in range(1, 19)]

    def test_weighted_means_hit_targets(self, small_bundle):
        """Share-weighted yearly index means equal the configured trajectory."""
        firms = small_bundle.firms
        means = yearly_means(firms.index.washing, firms.shares)

        for year, target in zip(SMALL_CONFIG.years, SMALL_CONFIG.yearly_means):
            assert means[year] == pytest.approx(target, abs=1e-6)

    def test_shares_sum_to_one_per_year(self, small_bundle):
        frame = small_bundle.firms.firms_frame()

        totals = frame.groupby("year")["platform_share"].sum()

        np.testing.assert_allclose(totals.to_numpy(), 1.0, atol=1e-9)

    def test_usage_correlation_is_exact(self, small_bundle):
        """The usage series correlates with the yearly means at the target."""
        firms = small_bundle.firms
        means = yearly_means(firms.index.washing, firms.shares)
        years = sorted(firms.usage_rates)

        r = np.corrcoef([means[y] for y in years], [firms.usage_rates[y] for y in years])[0, 1]

        assert r == pytest.approx(-0.76, abs=1e-9)

    def test_breadth_regression_is_exact(self, small_bundle):
        """Platform breadth regressed on the survey-year index gives the set slope and t."""
        firms = small_bundle.firms
        x = firms.survey_values(SMALL_CONFIG.survey_year)
        y = [firms.breadth[f] for f in firms.firm_ids]

        fit = stats.linregress(x, y)

        assert fit.slope == pytest.approx(-1.24, abs=1e-9)
        assert fit.slope / fit.stderr == pytest.approx(-8.67, abs=1e-6)

    def test_frames(self, small_bundle):
        firms = small_bundle.firms

        assert list(firms.usage_frame().columns) == ["year", "usage_rate"]
        assert list(firms.platforms_frame().columns) == ["firm_id", "product_breadth"]
        assert {"industry", "founded", "platform_share"} <= set(firms.firms_frame().columns)


class TestHouseholds:
    """Tests for the household survey draw."""

    def test_columns(self, small_bundle):
        assert tuple(small_bundle.households.columns) == HOUSEHOLD_COLUMNS

    def test_size_and_year(self, small_bundle):
        households = small_bundle.households

        assert len(households) == 1500
        assert (households["year"] == 2019).all()
        assert households["household_id"].is_unique

    def test_ranges(self, small_bundle):
        """Ordinal columns stay on their scales."""
        households = small_bundle.households

        assert households["y1_use"].isin([0, 1]).all()
        assert households["y2_breadth"].between(0, 7).all()
        assert households["knowledge_exclusion"].between(0, 4).all()
        assert households["risk_exclusion"].between(0, 3).all()
        assert households["age"].between(18, 85).all()

    def test_washing_moments(self, small_bundle):
        """Household index values match the target mean and SD up to sampling error."""
        washing = small_bundle.households["ai_washing"]

        assert washing.mean() == pytest.approx(0.421, abs=0.1)
        assert washing.std() == pytest.approx(0.874, abs=0.1)

    def test_washing_comes_from_firm(self, small_bundle):
        """Each household carries its platform's survey-year index value."""
        firms = small_bundle.firms
        lookup = dict(zip(firms.firm_ids, firms.survey_values(2019)))
        households = small_bundle.households

        expected = households["firm_id"].map(lookup)

        np.testing.assert_allclose(households["ai_washing"], expected)

    def test_levels(self, small_bundle):
        households = small_bundle.households

        assert households["y1_use"].mean() == pytest.approx(0.243, abs=0.05)
        assert households["knowledge_exclusion"].mean() == pytest.approx(2.087, abs=0.15)
        assert households["risk_exclusion"].mean() == pytest.approx(1.823, abs=0.15)

    def test_deterministic(self, small_bundle):
        """The same seed draws the same survey."""
        again = generate(SMALL_CONFIG, seed=11)

        pd.testing.assert_frame_equal(again.households, small_bundle.households)
        assert again.truth == small_bundle.truth

    def test_truth_manifest_keys(self, small_bundle):
        truth = small_bundle.truth

        assert truth["seed"] == 11
        assert truth["baseline.ai_washing"] == -0.287
        assert truth["ordered.ai_washing"] == -0.295
        assert "structural.confounding" in truth
        assert "structural.breadth_cut_7" in truth


class TestRecovery:
    """Estimators recover the planted coefficients from the full-size bundle."""

    def test_household_coefficients(self, default_bundle):
        """Baseline, ordered, path and interaction coefficients sit inside their 95% CIs."""
        estimates = recovered_estimates(default_bundle.households)
        truth = default_bundle.truth

        assert len(estimates) == 8
        for name, (estimate, se) in estimates.items():
            assert within(estimate, se, truth[name]), name

    def test_planted_values(self, default_bundle):
        """The manifest carries the configured estimands, not values derived from the draw."""
        truth = default_bundle.truth

        assert truth["baseline.ai_washing"] == -0.287
        assert truth["ordered.ai_washing"] == -0.295
        assert truth["mediation.c_prime"] == -0.134
        assert truth["moderation.interaction"] == 0.156

    def test_coverage_across_seeds(self):
        """Over 20 seeds at n = 6800, 95% intervals cover at least 90% of the truths.

        Each coefficient on its own is covered in at least 15 of the 20 bundles.
        """
        config = TruthConfig(iv_households=600)
        reports = []
        for seed in COVERAGE_SEEDS:
            bundle = generate(config, seed=seed)
            reports.append(oracle_report(bundle.truth, recovered_estimates(bundle.households)).frame)
        frame = pd.concat(reports, ignore_index=True)

        assert (frame["status"] == "checked").all()
        assert frame["covered"].astype(float).mean() >= 0.9
        per_parameter = frame.groupby("parameter")["covered"].apply(lambda c: c.astype(float).mean())
        assert len(per_parameter) == 8
        assert (per_parameter >= 0.75).all(), per_parameter.to_dict()

    def test_iv_effect(self, default_bundle):
        spec = IVSpec(
            "y1_use",
            "ai_washing",
            ("industry_mean_washing", "firm_age"),
            ("age", "education", "financial_literacy", "ln_income"),
            robust=True,
        )
        result = fit_2sls(default_bundle.iv_sample, spec)

        assert within(result.coef, result.se, -0.06)
        assert result.ols_coef > result.coef
        assert result.first_stage_f > 10.0

    def test_structural_self_test(self, default_bundle):
        check = structural_self_test(default_bundle)

        assert check.parameter == "mediation.a1"
        assert within(check.estimate, check.se, check.truth)


class TestIVSample:
    def test_columns(self):
        frame = gen_iv_sample(SMALL_CONFIG, seed=3, n=600)

        assert len(frame) == 600
        assert {"y1_use", "ai_washing", "industry_mean_washing", "firm_age"} <= set(frame.columns)
        assert frame["firm_age"].between(3, 25).all()


class TestBundleFiles:
    """Tests for writing and reading bundle files."""

    def test_write_bundle_layout(self, small_bundle, tmp_path):
        paths = write_bundle(small_bundle, tmp_path)

        assert paths == bundle_paths(tmp_path)
        assert len(list(paths.corpus_dir.glob("*.txt"))) == 72
        assert (paths.corpus_dir / "P01_2016.txt").exists()
        for path in (paths.lexicon, paths.firms_csv, paths.households_csv, paths.usage_csv,
                     paths.platforms_csv, paths.iv_csv, paths.truth):
            assert path.exists()

    def test_households_csv_round_trip(self, small_bundle, tmp_path):
        paths = write_bundle(small_bundle, tmp_path)

        frame = pd.read_csv(paths.households_csv)

        assert tuple(frame.columns) == HOUSEHOLD_COLUMNS
        assert len(frame) == len(small_bundle.households)

    def test_read_truth(self, small_bundle, tmp_path):
        paths = write_bundle(small_bundle, tmp_path)

        truth = read_truth(paths.truth)

        assert truth.keys() == small_bundle.truth.keys()
        for key, value in small_bundle.truth.items():
            assert truth[key] == pytest.approx(value, rel=1e-12)

    def test_read_truth_skips_comments_and_text(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("# header\nmediation.a1=0.348\nlabel=east\n\n", encoding="utf-8")

        assert read_truth(path) == {"mediation.a1": 0.348}


class TestOracleReport:
    """Tests for the recovery report."""

    def test_covered_and_missed(self):
        truth = {"a": 1.0, "b": 0.0}
        estimates = {"a": (1.1, 0.1), "b": (1.0, 0.1)}

        report = oracle_report(truth, estimates)
        rows = report.frame.set_index("parameter")

        assert bool(rows.loc["a", "covered"])
        assert not bool(rows.loc["b", "covered"])
        assert report.checked == 2
        assert report.coverage == 0.5

    def test_unchecked_parameter(self):
        """Estimates without a truth value are listed but not scored."""
        report = oracle_report({}, {"extra": (0.2, 0.1)})

        assert report.frame.loc[0, "status"] == "unchecked"
        assert report.checked == 0
        assert math.isnan(report.coverage)

    def test_corrupted_estimate_is_not_covered(self):
        """An estimate 10 standard errors off the truth is flagged."""
        report = oracle_report({"mediation.a1": 0.348}, {"mediation.a1": (0.348 + 10 * 0.02, 0.02)})

        assert not bool(report.frame.loc[0, "covered"])
        assert report.coverage == 0.0

    def test_interval_width(self):
        report = oracle_report({"a": 0.0}, {"a": (0.0, 1.0)}, level=0.95)

        assert report.frame.loc[0, "ci_hi"] == pytest.approx(1.959964, abs=1e-6)
