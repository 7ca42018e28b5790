import math

import numpy as np
import pandas as pd
import pytest
from conftest import make_households

from aiwashing.datagen import CONTROL_COLUMNS
from aiwashing.exceptions import InsufficientData, InvalidSpec, SchemaMismatch
from aiwashing.models import CoefficientSource
from aiwashing.policy import (
    PARAMETERS,
    SCENARIOS,
    CostModel,
    ScenarioSpec,
    SimModel,
    apply_scenario,
    cost_benefit,
    default_scenarios,
    fit_sim_model,
    scenario_from_mapping,
    sensitivity,
    simulate,
    simulation_frame,
    simulation_text,
)


def create_model(**overrides) -> SimModel:
    """Helper to build a supplied-coefficient model with sensible signs."""
    values = dict(
        treatment="ai_washing",
        mediators=("knowledge_exclusion", "risk_exclusion"),
        moderator="social_capital",
        intercept=-0.2,
        direct=-0.134,
        b=(-0.432, -0.487),
        sc_main=0.087,
        moderation=0.0,
        a=(0.348, 0.312),
        control_coefs={"education": 0.03},
    )
    values.update(overrides)
    return SimModel.supplied(**values)


@pytest.fixture(scope="module")
def population():
    return make_households(n=2500, seed=12)


class TestScenarioSpec:
    """Tests for scenario parameter ranges."""

    @pytest.mark.parametrize(
        "fields",
        [
            {"washing_multiplier": 1.5},
            {"washing_multiplier": -0.1},
            {"knowledge_multiplier": 0.0},
            {"knowledge_multiplier": 1.2},
            {"social_capital_multiplier": 0.9},
        ],
    )
    def test_out_of_range(self, fields):
        with pytest.raises(InvalidSpec):
            ScenarioSpec("bad", **fields)

    def test_presets(self):
        assert [s.label for s in default_scenarios()] == ["S1", "S2", "S3", "S4", "TG"]
        assert SCENARIOS["S4"].washing_multiplier == 0.5
        assert SCENARIOS["TG"].changes_washing
        assert ScenarioSpec("none").is_neutral

    def test_from_mapping(self):
        scenario = scenario_from_mapping({"preset": "S2", "knowledge_multiplier": 0.5})

        assert scenario.label == "S2"
        assert scenario.knowledge_multiplier == 0.5

    def test_unknown_preset(self):
        with pytest.raises(InvalidSpec):
            scenario_from_mapping({"preset": "S9"})


class TestSimModel:
    """Tests for the structural uptake model."""

    def test_supplied_source(self):
        assert create_model().source is CoefficientSource.SUPPLIED
        assert create_model().controls == ("education",)

    def test_missing_control_coefficient(self):
        with pytest.raises(InvalidSpec):
            create_model(controls=("education", "age"))

    def test_non_finite_coefficient(self):
        with pytest.raises(InvalidSpec):
            create_model(direct=float("nan"))

    def test_calibrate_intercept(self, population):
        model = create_model().calibrate_intercept(population, 0.243)

        assert np.mean(model.uptake(population)) == pytest.approx(0.243, abs=1e-9)

    def test_perturbed_scales_paths(self):
        model = create_model(moderation=0.1).perturbed(knowledge_path=1.1, moderation=0.5)

        assert model.b == pytest.approx((-0.4752, -0.487))
        assert model.moderation == pytest.approx(0.05)
        assert model.a == (0.348, 0.312)

    def test_missing_column(self, population):
        with pytest.raises(SchemaMismatch):
            create_model().check(population.drop(columns=["risk_exclusion"]))

    def test_fit_sim_model(self, population):
        model = fit_sim_model(
            population,
            outcome="y1_use",
            treatment="ai_washing",
            mediators=("knowledge_exclusion", "risk_exclusion"),
            moderator="social_capital",
            controls=("education", "age"),
        )

        assert model.source is CoefficientSource.FITTED
        assert model.a[0] > 0 and model.b[0] < 0
        assert model.centering[1] == pytest.approx(population["social_capital"].mean())
        assert set(model.control_coefs) == {"education", "age"}


class TestApplyScenario:
    """Tests for counterfactual population edits."""

    def test_neutral_scenario_is_a_copy(self, population):
        result = apply_scenario(population, ScenarioSpec("none"), create_model())

        pd.testing.assert_frame_equal(result, population)
        assert result is not population

    def test_washing_change_flows_into_mediators(self, population):
        model = create_model()

        result = apply_scenario(population, SCENARIOS["S1"], model)

        delta = result["ai_washing"] - population["ai_washing"]
        np.testing.assert_allclose(delta, -0.5 * population["ai_washing"])
        np.testing.assert_allclose(
            result["knowledge_exclusion"] - population["knowledge_exclusion"], 0.348 * delta
        )
        np.testing.assert_allclose(
            result["risk_exclusion"] - population["risk_exclusion"], 0.312 * delta
        )

    def test_knowledge_multiplier_applies_after_washing(self, population):
        model = create_model()

        result = apply_scenario(population, SCENARIOS["S4"], model)

        w = population["ai_washing"]
        expected = 0.7 * (population["knowledge_exclusion"] - 0.348 * 0.5 * w)
        np.testing.assert_allclose(result["knowledge_exclusion"], expected)
        np.testing.assert_allclose(result["social_capital"], 1.2 * population["social_capital"])

    def test_targeted_cap_only_lowers_high_values(self, population):
        result = apply_scenario(population, SCENARIOS["TG"], create_model())

        mean = population["ai_washing"].to_numpy().mean()
        low = population["ai_washing"] <= mean
        np.testing.assert_array_equal(result.loc[low, "ai_washing"], population.loc[low, "ai_washing"])
        assert (result.loc[~low, "ai_washing"] == mean).all()


class TestSimulate:
    """Tests for scenario uptake simulation."""

    def test_neutral_scenario_changes_nothing(self, population):
        outcome = simulate(population, ScenarioSpec("none"), create_model())

        assert outcome.abs_change == 0.0
        assert outcome.counterfactual_rate == outcome.baseline_rate

    def test_subgroup_deltas_aggregate(self, population):
        outcome = simulate(population, SCENARIOS["S4"], create_model(), subgroups=["region"])

        total = sum(
            outcome.subgroup_shares[k] * outcome.subgroup_deltas[k] for k in outcome.subgroup_deltas
        )
        assert total == pytest.approx(outcome.abs_change, abs=1e-10)
        assert set(outcome.subgroup_deltas) == {"region=central", "region=east", "region=west"}

    def test_every_lever_raises_uptake(self, population):
        model = create_model()

        changes = {label: simulate(population, s, model).abs_change for label, s in SCENARIOS.items()}

        assert all(change > 0 for change in changes.values())
        assert changes["S4"] == max(changes.values())

    def test_too_small_population(self, population):
        with pytest.raises(InsufficientData):
            simulate(population.head(50), SCENARIOS["S1"], create_model())

    def test_unknown_subgroup(self, population):
        with pytest.raises(SchemaMismatch):
            simulate(population, SCENARIOS["S1"], create_model(), subgroups=["village"])

    def test_frame_and_text(self, population):
        outcomes = [simulate(population, s, create_model()) for s in default_scenarios()]

        frame = simulation_frame(outcomes)

        assert list(frame["scenario"]) == ["S1", "S2", "S3", "S4", "TG"]
        assert frame["abs_change_pp"].iloc[0] == pytest.approx(100 * outcomes[0].abs_change)
        assert "order:" in simulation_text(outcomes)


class TestCostBenefit:
    """Tests for scenario costing."""

    def test_education_cost(self, population):
        outcome = simulate(population, SCENARIOS["S2"], create_model())

        result = cost_benefit(outcome, SCENARIOS["S2"], CostModel(), 10_000)

        assert result.cost == pytest.approx(55.0 * 10_000 * (1 - outcome.baseline_rate))
        assert result.new_users == pytest.approx(outcome.abs_change * 10_000)
        assert result.benefit == pytest.approx(result.new_users * 700.0 * 3)
        assert result.cb_ratio == pytest.approx(result.benefit / result.cost)

    def test_social_capital_cost(self, population):
        outcome = simulate(population, SCENARIOS["S3"], create_model())

        result = cost_benefit(outcome, SCENARIOS["S3"], CostModel(), 10_000)

        # 25 villages, one group per 1.5 villages
        assert result.cost == 1800.0 * math.ceil(25 / 1.5)

    def test_neutral_scenario_has_no_ratio(self, population):
        outcome = simulate(population, ScenarioSpec("none"), create_model())

        result = cost_benefit(outcome, ScenarioSpec("none"), CostModel(), 1000)

        assert result.cost == 0.0
        assert result.cb_ratio is None

    def test_invalid_cost_model(self):
        with pytest.raises(InvalidSpec):
            CostModel(value_per_user_year=0.0)


class TestSensitivity:
    """Tests for perturbation sensitivity analysis."""

    def test_deterministic_across_threads(self, population):
        model = create_model(moderation=0.05)
        scenarios = default_scenarios()

        serial = sensitivity(population, scenarios, model, reps=40, seed=3, threads=1)
        threaded = sensitivity(population, scenarios, model, reps=40, seed=3, threads=3)

        pd.testing.assert_frame_equal(serial.summary, threaded.summary)
        assert serial.ranking == threaded.ranking

    def test_report_shape(self, population):
        model = create_model(moderation=0.05)

        report = sensitivity(population, default_scenarios(), model, reps=20, seed=1)

        assert sorted(report.ranking) == sorted(PARAMETERS)
        assert len(report.elasticities) == 5 * len(PARAMETERS)
        assert report.rank_of(report.ranking[0]) == 1
        summary = report.summary.set_index("scenario")
        assert (summary["lo"] <= summary["hi"]).all()
        frame = report.to_frame()
        assert (frame["scenario"] == "overall").sum() == len(PARAMETERS)

    def test_zero_fraction_collapses_the_spread(self, population):
        report = sensitivity(
            population, [SCENARIOS["S1"]], create_model(), perturb_fraction=0.0, reps=10, seed=0
        )

        row = report.summary.iloc[0]
        assert row["lo"] == pytest.approx(row["point"])
        assert row["hi"] == pytest.approx(row["point"])

    def test_knowledge_lever_ranks_knowledge_path_first(self, population):
        report = sensitivity(population, [SCENARIOS["S2"]], create_model(), reps=10, seed=0)

        ranks = report.elasticities.set_index("param")["elasticity_rank"]
        assert ranks["knowledge_path"] == 1

    def test_too_few_reps(self, population):
        with pytest.raises(InvalidSpec):
            sensitivity(population, default_scenarios(), create_model(), reps=5, seed=0)

    def test_elasticity_is_the_recomputed_change(self, population):
        """Every parameter moves uptake under a lever that leaves its own column alone."""
        report = sensitivity(population, [SCENARIOS["S3"]], create_model(moderation=0.156), reps=10, seed=0)

        rows = report.elasticities.set_index("param")
        assert rows["elasticity"].to_numpy() == pytest.approx(rows["nonlinear_change"].abs().to_numpy())
        for parameter in ("direct_effect", "knowledge_path", "risk_path", "moderation"):
            assert rows.loc[parameter, "elasticity"] > 0.0, parameter

    def test_overall_ranking_follows_mean_elasticity(self, population):
        report = sensitivity(population, default_scenarios(), create_model(moderation=0.156), reps=10, seed=0)

        means = report.elasticities.groupby("param")["elasticity"].mean()
        assert [means[p] for p in report.ranking] == sorted(means, reverse=True)


class TestCalibratedScenarios:
    """Scenario effects and sensitivity on a model fitted to the full-size bundle."""

    @pytest.fixture(scope="class")
    def fitted(self, default_bundle):
        households = default_bundle.households
        model = fit_sim_model(
            households,
            outcome="y1_use",
            treatment="ai_washing",
            mediators=("knowledge_exclusion", "risk_exclusion"),
            moderator="social_capital",
            controls=tuple(CONTROL_COLUMNS),
        )
        return households, model

    def test_scenario_ordering(self, fitted):
        """Education beats halving washing, which beats social capital; the combination beats all."""
        households, model = fitted
        change = {s.label: simulate(households, s, model).abs_change for s in default_scenarios()}

        assert change["S2"] > change["S1"] > change["S3"] > 0.0
        assert change["S4"] > max(change["S1"], change["S2"], change["S3"])

    def test_paths_lead_the_ranking(self, fitted):
        households, model = fitted

        report = sensitivity(households, default_scenarios(), model, reps=10, seed=0)

        assert set(report.ranking[:2]) == {"knowledge_path", "risk_path"}
        assert report.rank_of("moderation") < report.rank_of("direct_effect")
