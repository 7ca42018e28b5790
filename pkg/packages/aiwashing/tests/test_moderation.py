import numpy as np
import pandas as pd
import pytest
from conftest import make_households, monte_carlo

from aiwashing.exceptions import GroupTooSmall, InvalidSpec, NotAModerationFit, SingularDesign
from aiwashing.glm import fit_model
from aiwashing.models import SplitKind
from aiwashing.moderation import (
    ModelSpec,
    ModerationSpec,
    SplitComparison,
    SplitFailure,
    SplitRule,
    chow_f,
    chow_z,
    default_slope_levels,
    fit_interaction,
    heterogeneity_battery,
    heterogeneity_frame,
    moderation_frame,
    simple_slopes,
    split_fit,
)

CONTROLS = ("age", "education", "income")


@pytest.fixture(scope="module")
def households():
    return make_households(n=4000, seed=8, interaction=0.06)


@pytest.fixture(scope="module")
def model_spec():
    return ModelSpec(outcome="y1_use", treatment="ai_washing", controls=CONTROLS)


def create_moderation(**overrides) -> ModerationSpec:
    """Helper to build the social-capital moderation spec with overrides."""
    values = dict(
        treatment="ai_washing", moderator="social_capital", outcome="y1_use", controls=CONTROLS
    )
    values.update(overrides)
    return ModerationSpec(**values)


class TestChowZ:
    """Tests for the two-group Wald difference."""

    def test_digital_experience_gap(self):
        """Published coefficient/z pairs reproduce the reported difference."""
        result = chow_z(-0.112, 0.112 / 1.89, -0.378, 0.378 / 6.89)

        assert result.diff == pytest.approx(0.266)
        assert 3.0 <= result.z <= 3.6
        assert result.p < 0.01

    def test_symmetry(self):
        a = chow_z(0.5, 0.1, 0.2, 0.2)
        b = chow_z(0.2, 0.2, 0.5, 0.1)

        assert a.diff == -b.diff
        assert a.se == b.se
        assert a.p == pytest.approx(b.p)


class TestFitInteraction:
    """Tests for interaction models."""

    def test_product_column_and_metadata(self, households):
        fit = fit_interaction(households, create_moderation())

        assert fit.interaction == ("ai_washing", "social_capital", "ai_washing_x_social_capital")
        assert "ai_washing_x_social_capital" in fit.columns
        assert fit.centering == {"ai_washing": 0.0, "social_capital": 0.0}

    def test_centering_leaves_product_and_likelihood_unchanged(self, households):
        raw = fit_interaction(households, create_moderation())
        centred = fit_interaction(households, create_moderation(center_inputs=True))

        product = "ai_washing_x_social_capital"
        assert centred.coefficients[product] == pytest.approx(raw.coefficients[product], abs=1e-6)
        assert centred.log_likelihood == pytest.approx(raw.log_likelihood, abs=1e-8)
        assert centred.centering["social_capital"] == pytest.approx(
            households["social_capital"].mean()
        )

    def test_recovers_positive_interaction(self, households):
        fit = fit_interaction(households, create_moderation())

        assert fit.coefficients["ai_washing_x_social_capital"] > 0.0

    def test_constant_moderator(self, households):
        frame = households.assign(flat=1.0)

        with pytest.raises(SingularDesign):
            fit_interaction(frame, create_moderation(moderator="flat"))

    def test_same_treatment_and_moderator(self):
        with pytest.raises(InvalidSpec):
            create_moderation(moderator="ai_washing")

    def test_moderator_as_control(self):
        with pytest.raises(InvalidSpec):
            create_moderation(controls=("age", "social_capital"))


class TestSimpleSlopes:
    """Tests for conditional treatment slopes."""

    def test_slopes_are_affine_in_the_level(self, households):
        fit = fit_interaction(households, create_moderation())

        rows = simple_slopes(fit, [0.0, 1.0, 2.0, 5.0])

        steps = np.diff([r.slope for r in rows]) / np.diff([r.level for r in rows])
        np.testing.assert_allclose(steps, fit.coefficients["ai_washing_x_social_capital"])
        assert rows[0].slope == pytest.approx(fit.coefficients["ai_washing"])
        assert rows[0].se == pytest.approx(fit.std_errors["ai_washing"])

    def test_centering_does_not_move_slopes(self, households):
        raw = fit_interaction(households, create_moderation())
        centred = fit_interaction(households, create_moderation(center_inputs=True))
        levels = default_slope_levels(households["social_capital"])

        for a, b in zip(simple_slopes(raw, levels), simple_slopes(centred, levels)):
            assert a.slope == pytest.approx(b.slope, abs=1e-5)
            assert a.se == pytest.approx(b.se, rel=1e-3)

    def test_default_levels_are_clamped(self):
        levels = default_slope_levels([0.0, 0.0, 0.0, 0.0, 10.0])

        assert levels[0] == 0.0
        assert levels[1] == pytest.approx(2.0)

    def test_requires_interaction(self, households):
        fit = fit_model(households, "y1_use", ["ai_washing"])

        with pytest.raises(NotAModerationFit):
            simple_slopes(fit, [1.0])


class TestSplitRule:
    """Tests for sample split assignment."""

    def test_median_ties_go_low(self):
        rule = SplitRule()

        assert list(rule.assign([1, 2, 2, 3])) == [False, False, False, True]

    def test_threshold_exclusive_low(self):
        rule = SplitRule(SplitKind.THRESHOLD, 60, low_inclusive=False)

        assert list(rule.assign([59, 60, 61])) == [False, True, True]

    def test_invert_swaps_sides(self):
        rule = SplitRule(SplitKind.THRESHOLD, 60, low_inclusive=False, invert=True)

        assert list(rule.assign([59, 60, 61])) == [True, False, False]
        assert rule.describe() == "high >= 60 (inverted)"

    def test_binary(self):
        rule = SplitRule(SplitKind.BINARY)

        assert list(rule.assign([0, 1, 1])) == [False, True, True]
        with pytest.raises(InvalidSpec):
            rule.assign([0, 2])

    def test_threshold_needs_value(self):
        with pytest.raises(InvalidSpec):
            SplitRule(SplitKind.THRESHOLD)


class TestSplitFit:
    """Tests for split-sample comparisons."""

    def test_groups_partition_the_sample(self, households, model_spec):
        rule = SplitRule(SplitKind.THRESHOLD, 9)

        result = split_fit(households, "education", rule, model_spec)

        assert result.n_low + result.n_high == len(households)
        assert result.n_low == int((households["education"] <= 9).sum())

    def test_split_column_dropped_from_controls(self, households, model_spec):
        result = split_fit(households, "education", SplitRule(), model_spec)

        assert "education" not in result.low.columns
        assert "education" not in result.high.columns

    def test_difference_is_high_minus_low(self, households, model_spec):
        result = split_fit(households, "prior_use", SplitRule(SplitKind.BINARY), model_spec)

        t = "ai_washing"
        assert result.diff == pytest.approx(
            result.high.coefficients[t] - result.low.coefficients[t]
        )
        assert result.diff_z == pytest.approx(result.diff / result.diff_se)

    def test_attenuation(self, households, model_spec):
        result = split_fit(households, "age", SplitRule(), model_spec)

        assert result.attenuation == pytest.approx(1.0 - result.ame_high / result.ame_low)

    def test_empty_group(self, households, model_spec):
        rule = SplitRule(SplitKind.THRESHOLD, 1000)

        with pytest.raises(GroupTooSmall) as exc_info:
            split_fit(households, "age", rule, model_spec)

        assert exc_info.value.side == "high"

    def test_chow_f_on_linear_version(self, households, model_spec):
        result = chow_f(households, "prior_use", SplitRule(SplitKind.BINARY), model_spec)

        assert result.df1 == 5
        assert result.df2 == len(households) - 10
        assert result.f >= 0.0
        assert 0.0 <= result.p <= 1.0


class TestHeterogeneityBattery:
    """Tests for running several split dimensions."""

    def test_failures_keep_their_slot(self, households, model_spec):
        dims = [
            ("education", SplitRule(SplitKind.THRESHOLD, 9)),
            ("age", SplitRule(SplitKind.THRESHOLD, 1000)),
            ("prior_use", SplitRule(SplitKind.BINARY, invert=True)),
        ]

        results = heterogeneity_battery(households, dims, model_spec, threads=2)

        assert isinstance(results[0], SplitComparison)
        assert isinstance(results[1], SplitFailure)
        assert isinstance(results[2], SplitComparison)

        frame = heterogeneity_frame(results)
        assert list(frame["status"]) == ["ok", "failed", "ok"]
        assert frame.loc[1, "split_var"] == "age"

    def test_thread_count_does_not_change_results(self, households, model_spec):
        dims = [("education", SplitRule()), ("age", SplitRule())]

        serial = heterogeneity_battery(households, dims, model_spec, threads=1)
        threaded = heterogeneity_battery(households, dims, model_spec, threads=2)

        assert [r.diff for r in serial] == [r.diff for r in threaded]


class TestNullDraws:
    """Repeated draws in which treatment effects do not vary."""

    def test_interaction_interval_covers_zero(self):
        spec = create_moderation()

        def trial(rng: np.random.Generator) -> bool:
            fit = fit_interaction(make_households(n=800, seed=rng, interaction=0.0), spec)
            lo, hi = fit.confidence_interval(spec.product)
            return lo <= 0.0 <= hi

        assert sum(monte_carlo(trial, runs=100, seed=407)) >= 90

    def test_identical_groups_rarely_differ(self, model_spec):
        """Splitting on a column unrelated to the outcome leaves |diff_z| < 1.96 in >= 90 of 100 draws."""

        def trial(rng: np.random.Generator) -> bool:
            data = make_households(n=800, seed=rng)
            return abs(split_fit(data, "prior_use", SplitRule(SplitKind.BINARY), model_spec).diff_z) < 1.96

        assert sum(monte_carlo(trial, runs=100, seed=416)) >= 90

    def test_battery_flags_no_dimension(self, model_spec):
        """Each null dimension is significant at 5% in at most 10 of 100 draws."""
        dims = [("age", SplitRule()), ("prior_use", SplitRule(SplitKind.BINARY))]

        def trial(rng: np.random.Generator) -> list[bool]:
            results = heterogeneity_battery(make_households(n=800, seed=rng), dims, model_spec)
            return [isinstance(r, SplitComparison) and r.diff_p >= 0.05 for r in results]

        quiet = np.array(monte_carlo(trial, runs=100, seed=436))

        assert (quiet.sum(axis=0) >= 90).all()


def test_moderation_frame_rows(households, model_spec):
    fit = fit_interaction(households, create_moderation())
    comparison = split_fit(households, "social_capital", SplitRule(), model_spec)

    frame = moderation_frame(fit, comparison)

    assert list(frame["model"]) == ["interaction"] * 3 + ["high", "low", "difference"]
    assert isinstance(frame, pd.DataFrame)
