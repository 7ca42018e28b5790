import dataclasses
import math

import numpy as np
import pytest
from conftest import make_households, monte_carlo

from aiwashing.exceptions import InsufficientData, InvalidSpec
from aiwashing.mediation import (
    QUANTITIES,
    MediationSpec,
    PathEstimate,
    bootstrap_mediation,
    decomposition_report,
    fit_mediation,
    single_equation_total,
)
from aiwashing.models import OutcomeLink


def create_spec(**overrides) -> MediationSpec:
    """Helper to build the knowledge/risk exclusion system with overrides."""
    values = dict(
        treatment="ai_washing",
        mediators=("knowledge_exclusion", "risk_exclusion"),
        outcome="y1_use",
        controls=("age", "education", "social_capital"),
    )
    values.update(overrides)
    return MediationSpec(**values)


@pytest.fixture(scope="module")
def households():
    return make_households(n=3000, seed=4)


class TestMediationSpec:
    """Tests for mediation specification invariants."""

    def test_needs_two_mediators(self):
        with pytest.raises(InvalidSpec):
            create_spec(mediators=("knowledge_exclusion",))

    def test_mediators_differ(self):
        with pytest.raises(InvalidSpec):
            create_spec(mediators=("risk_exclusion", "risk_exclusion"))

    def test_treatment_is_not_a_mediator(self):
        with pytest.raises(InvalidSpec):
            create_spec(mediators=("ai_washing", "risk_exclusion"))

    def test_mediator_is_not_a_control(self):
        with pytest.raises(InvalidSpec):
            create_spec(controls=("age", "risk_exclusion"))

    def test_link_is_coerced(self):
        assert create_spec(outcome_link="linear").outcome_link is OutcomeLink.LINEAR


class TestFitMediation:
    """Tests for the three-equation path model."""

    def test_linear_decomposition_is_exact(self, households):
        """With a linear outcome, c' + a1·b1 + a2·b2 equals the total effect."""
        spec = create_spec(outcome_link="linear")

        dec = fit_mediation(households, spec)

        assert dec.total_effect == pytest.approx(single_equation_total(households, spec), abs=1e-8)

    def test_identities(self, households):
        dec = fit_mediation(households, create_spec())

        assert dec.total_indirect == dec.indirect_1 + dec.indirect_2
        assert dec.total_effect == dec.c_prime.coef + dec.total_indirect
        assert dec.indirect_1 == dec.a1.coef * dec.b1.coef

    def test_signs_follow_the_data(self, households):
        """Washing raises both exclusions, which lower use."""
        dec = fit_mediation(households, create_spec())

        assert dec.a1.coef > 0 and dec.a2.coef > 0
        assert dec.b1.coef < 0 and dec.b2.coef < 0
        assert dec.total_indirect < 0

    def test_path_z_and_p(self, households):
        dec = fit_mediation(households, create_spec())

        assert dec.a1.z == pytest.approx(dec.a1.coef / dec.a1.se)
        assert 0.0 <= dec.b1.p <= 1.0

    def test_proportion_undefined_at_zero_total(self, households):
        dec = fit_mediation(households, create_spec())
        zero = dataclasses.replace(dec, c_prime=PathEstimate(-dec.total_indirect, 1.0))

        assert zero.proportion(0.5) is None

    def test_too_few_rows(self, households):
        with pytest.raises(InsufficientData):
            fit_mediation(households.head(15), create_spec())


class TestBootstrapMediation:
    """Tests for the percentile bootstrap."""

    def test_same_seed_same_draws_any_thread_count(self, households):
        spec = create_spec()

        serial = bootstrap_mediation(households, spec, replicates=100, seed=9, threads=1)
        threaded = bootstrap_mediation(households, spec, replicates=100, seed=9, threads=4)

        for quantity in QUANTITIES:
            np.testing.assert_array_equal(serial.draws[quantity], threaded.draws[quantity])
        assert serial["indirect_1"] == threaded["indirect_1"]

    def test_intervals_bracket_the_point(self, households):
        result = bootstrap_mediation(households, create_spec(), replicates=200, seed=1)

        ci = result["total_indirect"]
        assert ci.lower < ci.point < ci.upper
        assert ci.upper < 0.0
        assert result.failures == 0
        assert result.status == "ok"

    def test_cluster_resampling(self, households):
        result = bootstrap_mediation(
            households, create_spec(), replicates=100, seed=2, cluster="firm_id"
        )

        assert result.cluster == "firm_id"
        assert len(result.draws["a1"]) == 100 - result.failures

    def test_too_few_replicates(self, households):
        with pytest.raises(InvalidSpec):
            bootstrap_mediation(households, create_spec(), replicates=50, seed=0)


class TestNullPathCoverage:
    """Repeated draws with no treatment effect on the knowledge mediator."""

    def test_intervals_cover_zero(self):
        """The a1 interval and the bootstrap indirect_1 interval cover 0 in >= 90 of 100 draws."""
        spec = create_spec()

        def trial(rng: np.random.Generator) -> tuple[bool, bool]:
            data = make_households(n=400, seed=rng, knowledge_path=0.0)
            a1 = fit_mediation(data, spec).a1
            ci = bootstrap_mediation(data, spec, replicates=100, seed=int(rng.integers(2**31)))["indirect_1"]
            return abs(a1.coef) <= 1.96 * a1.se, ci.lower <= 0.0 <= ci.upper

        results = np.array(monte_carlo(trial, runs=100, seed=349))

        assert results[:, 0].sum() >= 90
        assert results[:, 1].sum() >= 90


class TestDecompositionReport:
    """Tests for the two-panel mediation report."""

    def test_panels(self, households):
        spec = create_spec()
        dec = fit_mediation(households, spec)
        boot = bootstrap_mediation(households, spec, replicates=100, seed=5)

        report = decomposition_report(dec, boot)

        assert list(report.panel_a["path"]) == ["a1", "a2", "b1", "b2", "c_prime"]
        panel_b = report.panel_b.set_index("path")
        shares = panel_b.loc[["indirect_1", "indirect_2"], "share_of_indirect"]
        assert shares.sum() == pytest.approx(1.0)
        assert math.isnan(panel_b.loc["total_effect", "proportion"])
        assert "Panel B" in report.text()

    def test_panel_a_only(self, households):
        report = decomposition_report(fit_mediation(households, create_spec()))

        assert report.panel_b is None
        assert set(report.to_frame()["panel"]) == {"A"}
