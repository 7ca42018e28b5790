"""Counterfactual policy scenarios on a fitted structural uptake model.

A scenario edits household columns in a fixed order: the washing change is
propagated into both mediators through their path coefficients, then the
knowledge multiplier is applied, then the social capital multiplier. Uptake
is the household average of the logistic outcome probability.
"""

import dataclasses
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy import optimize
from scipy.special import expit

from .exceptions import InsufficientData, InvalidSpec, SchemaMismatch
from .glm import complete_cases, fit_model
from .models import CoefficientSource, ModelKind
from .parallel import run_indexed
from .reporting import format_table
from .utils import replicate_rng

logger = logging.getLogger(__name__)

MIN_POPULATION = 100
MIN_SENSITIVITY_REPS = 10
ELASTICITY_STEP = 0.1
PARAMETERS = ("direct_effect", "knowledge_path", "risk_path", "moderation")
COMPOSITION_ORDER = "washing -> mediators (a*dw) -> knowledge multiplier -> social capital multiplier"


@dataclass(frozen=True)
class SimModel:
    """Outcome logit plus the two mediator path coefficients.

    The outcome index is
    ``intercept + direct·w + b1·M1 + b2·M2 + sc_main·SC + moderation·(w − c_w)(SC − c_sc) + Σ γ·x``.
    """

    treatment: str
    mediators: tuple[str, str]
    moderator: str
    controls: tuple[str, ...]
    intercept: float
    direct: float
    b: tuple[float, float]
    sc_main: float
    moderation: float
    a: tuple[float, float]
    control_coefs: dict[str, float] = field(default_factory=dict)
    centering: tuple[float, float] = (0.0, 0.0)
    source: CoefficientSource = CoefficientSource.FITTED

    def __post_init__(self) -> None:
        object.__setattr__(self, "mediators", tuple(self.mediators))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "source", CoefficientSource(self.source))
        values = [
            self.intercept, self.direct, *self.b, self.sc_main, self.moderation,
            *self.a, *self.centering, *self.control_coefs.values(),
        ]
        if not all(math.isfinite(v) for v in values):
            raise InvalidSpec("Simulation coefficients must all be finite")
        missing = set(self.controls) - set(self.control_coefs)
        if missing:
            raise InvalidSpec(f"No coefficient for controls {sorted(missing)}")

    @classmethod
    def supplied(cls, **kwargs: object) -> "SimModel":
        """Model built from supplied coefficients instead of fits."""
        kwargs.setdefault("control_coefs", {})
        kwargs.setdefault("controls", tuple(kwargs["control_coefs"]))
        return cls(**kwargs, source=CoefficientSource.SUPPLIED)

    @property
    def required_columns(self) -> list[str]:
        return [self.treatment, *self.mediators, self.moderator, *self.controls]

    def check(self, population: pd.DataFrame) -> None:
        if any(c not in population.columns for c in self.required_columns):
            raise SchemaMismatch(self.required_columns, population.columns)

    def product(self, population: pd.DataFrame) -> np.ndarray:
        w = population[self.treatment].to_numpy(dtype=float)
        sc = population[self.moderator].to_numpy(dtype=float)
        return (w - self.centering[0]) * (sc - self.centering[1])

    def linear_index(self, population: pd.DataFrame) -> np.ndarray:
        m1, m2 = self.mediators
        eta = (
            self.intercept
            + self.direct * population[self.treatment].to_numpy(dtype=float)
            + self.b[0] * population[m1].to_numpy(dtype=float)
            + self.b[1] * population[m2].to_numpy(dtype=float)
            + self.sc_main * population[self.moderator].to_numpy(dtype=float)
            + self.moderation * self.product(population)
        )
        for name in self.controls:
            eta = eta + self.control_coefs[name] * population[name].to_numpy(dtype=float)
        return eta

    def uptake(self, population: pd.DataFrame) -> np.ndarray:
        return expit(self.linear_index(population))

    def perturbed(
        self,
        *,
        direct_effect: float = 1.0,
        knowledge_path: float = 1.0,
        risk_path: float = 1.0,
        moderation: float = 1.0,
    ) -> "SimModel":
        """Scale the direct effect, each mediator's outcome coefficient and the
        moderation coefficient; the path products scale with them.
        """
        return dataclasses.replace(
            self,
            direct=self.direct * direct_effect,
            b=(self.b[0] * knowledge_path, self.b[1] * risk_path),
            moderation=self.moderation * moderation,
        )

    def calibrate_intercept(self, population: pd.DataFrame, target_rate: float) -> "SimModel":
        """Shift the intercept so mean uptake equals ``target_rate``."""
        if not 0.0 < target_rate < 1.0:
            raise InvalidSpec("Target uptake must lie strictly between 0 and 1")
        self.check(population)
        base = self.linear_index(population) - self.intercept

        def gap(intercept: float) -> float:
            return float(np.mean(expit(base + intercept))) - target_rate

        intercept = optimize.brentq(gap, -50.0, 50.0, xtol=1e-12)
        return dataclasses.replace(self, intercept=float(intercept))


def fit_sim_model(
    data: pd.DataFrame,
    *,
    outcome: str,
    treatment: str,
    mediators: Sequence[str],
    moderator: str,
    controls: Sequence[str] = (),
) -> SimModel:
    """Fit the outcome logit and both mediator equations on the same rows.

    The outcome logit carries the mean-centred treatment × moderator product.
    """
    m1, m2 = mediators
    controls = [c for c in controls if c not in (treatment, moderator, m1, m2)]
    frame = complete_cases(data, [outcome, treatment, m1, m2, moderator, *controls])
    centering = (float(frame[treatment].mean()), float(frame[moderator].mean()))
    product = f"{treatment}_x_{moderator}_centred"
    frame[product] = (frame[treatment] - centering[0]) * (frame[moderator] - centering[1])

    outcome_fit = fit_model(
        frame, outcome, [treatment, m1, m2, moderator, product, *controls],
        kind=ModelKind.BINARY_LOGIT,
    )
    path = [treatment, *controls]
    a1 = fit_model(frame, m1, path, kind=ModelKind.OLS).coefficients[treatment]
    a2 = fit_model(frame, m2, path, kind=ModelKind.OLS).coefficients[treatment]
    coef = outcome_fit.coefficients
    return SimModel(
        treatment=treatment,
        mediators=(m1, m2),
        moderator=moderator,
        controls=tuple(controls),
        intercept=coef["const"],
        direct=coef[treatment],
        b=(coef[m1], coef[m2]),
        sc_main=coef[moderator],
        moderation=coef[product],
        a=(a1, a2),
        control_coefs={c: coef[c] for c in controls},
        centering=centering,
        source=CoefficientSource.FITTED,
    )


@dataclass(frozen=True)
class ScenarioSpec:
    label: str
    washing_multiplier: float = 1.0
    washing_cap_at_mean: bool = False
    knowledge_multiplier: float = 1.0
    social_capital_multiplier: float = 1.0
    description: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.washing_multiplier <= 1.0:
            raise InvalidSpec(f"washing_multiplier must be in [0, 1], got {self.washing_multiplier}")
        if not 0.0 < self.knowledge_multiplier <= 1.0:
            raise InvalidSpec(f"knowledge_multiplier must be in (0, 1], got {self.knowledge_multiplier}")
        if not self.social_capital_multiplier >= 1.0:
            raise InvalidSpec(
                f"social_capital_multiplier must be >= 1, got {self.social_capital_multiplier}"
            )

    @property
    def changes_washing(self) -> bool:
        return self.washing_multiplier != 1.0 or self.washing_cap_at_mean

    @property
    def is_neutral(self) -> bool:
        return (
            not self.changes_washing
            and self.knowledge_multiplier == 1.0
            and self.social_capital_multiplier == 1.0
        )


SCENARIOS: dict[str, ScenarioSpec] = {
    "S1": ScenarioSpec("S1", washing_multiplier=0.5, description="Washing governance (-50%)"),
    "S2": ScenarioSpec("S2", knowledge_multiplier=0.7, description="Financial education (-30% knowledge exclusion)"),
    "S3": ScenarioSpec("S3", social_capital_multiplier=1.2, description="Social capital building (+20%)"),
    "S4": ScenarioSpec(
        "S4",
        washing_multiplier=0.5,
        knowledge_multiplier=0.7,
        social_capital_multiplier=1.2,
        description="Comprehensive (S1 + S2 + S3)",
    ),
    "TG": ScenarioSpec("TG", washing_cap_at_mean=True, description="Targeted governance (cap at mean)"),
}


def default_scenarios() -> list[ScenarioSpec]:
    return list(SCENARIOS.values())


def apply_scenario(
    population: pd.DataFrame, scenario: ScenarioSpec, model: SimModel
) -> pd.DataFrame:
    """Counterfactual copy of ``population`` under ``scenario``.

    Only columns the scenario touches are rewritten, so a neutral scenario
    returns an exact copy.

    Raises:
        SchemaMismatch: a model column is missing
    """
    model.check(population)
    out = population.copy()
    m1, m2 = model.mediators
    if scenario.changes_washing:
        w = out[model.treatment].to_numpy(dtype=float)
        shifted = w * scenario.washing_multiplier
        if scenario.washing_cap_at_mean:
            shifted = np.minimum(shifted, w.mean())
        delta = shifted - w
        out[model.treatment] = shifted
        out[m1] = out[m1].to_numpy(dtype=float) + model.a[0] * delta
        out[m2] = out[m2].to_numpy(dtype=float) + model.a[1] * delta
    if scenario.knowledge_multiplier != 1.0:
        out[m1] = scenario.knowledge_multiplier * out[m1].to_numpy(dtype=float)
    if scenario.social_capital_multiplier != 1.0:
        out[model.moderator] = scenario.social_capital_multiplier * out[
            model.moderator
        ].to_numpy(dtype=float)
    return out


@dataclass(frozen=True)
class CostModel:
    """Unit costs and benefits in yuan."""

    training_cost_per_farmer: float = 55.0
    group_setup_cost: float = 1800.0
    value_per_user_year: float = 700.0
    horizon_years: int = 3
    regulator_cost_per_platform: float = 13_500_000.0
    village_size: int = 400
    villages_per_group: float = 1.5

    def __post_init__(self) -> None:
        values = [
            self.training_cost_per_farmer, self.group_setup_cost, self.value_per_user_year,
            self.horizon_years, self.regulator_cost_per_platform, self.village_size,
            self.villages_per_group,
        ]
        if any(not v > 0 for v in values):
            raise InvalidSpec("Cost model parameters must all be positive")


@dataclass(frozen=True)
class SimOutcome:
    """Uptake before and after a scenario; rates are fractions.

    ``abs_change`` is ``counterfactual_rate − baseline_rate`` and
    ``subgroup_deltas`` uses ``"column=level"`` keys.
    """

    label: str
    baseline_rate: float
    counterfactual_rate: float
    abs_change: float
    rel_change: float
    n_households: int
    subgroup_deltas: dict[str, float] = field(default_factory=dict)
    subgroup_shares: dict[str, float] = field(default_factory=dict)
    new_users: Optional[float] = None
    cost: Optional[float] = None
    benefit: Optional[float] = None
    cb_ratio: Optional[float] = None


def _check_population(population: pd.DataFrame) -> None:
    if len(population) < MIN_POPULATION:
        raise InsufficientData(
            f"Simulation needs at least {MIN_POPULATION} households, got {len(population)}"
        )


def _outcome(
    label: str,
    base: np.ndarray,
    counterfactual: np.ndarray,
    population: pd.DataFrame,
    subgroups: Sequence[str],
) -> SimOutcome:
    baseline_rate = float(np.mean(base))
    counterfactual_rate = float(np.mean(counterfactual))
    abs_change = counterfactual_rate - baseline_rate
    deltas: dict[str, float] = {}
    shares: dict[str, float] = {}
    for column in subgroups:
        values = population[column].to_numpy()
        for level in sorted(pd.unique(values), key=str):
            mask = values == level
            key = f"{column}={level}"
            deltas[key] = float(np.mean(counterfactual[mask]) - np.mean(base[mask]))
            shares[key] = float(mask.mean())
    return SimOutcome(
        label=label,
        baseline_rate=baseline_rate,
        counterfactual_rate=counterfactual_rate,
        abs_change=abs_change,
        rel_change=abs_change / baseline_rate if baseline_rate > 0 else float("nan"),
        n_households=len(population),
        subgroup_deltas=deltas,
        subgroup_shares=shares,
    )


def simulate(
    population: pd.DataFrame,
    scenario: ScenarioSpec,
    model: SimModel,
    *,
    subgroups: Sequence[str] = (),
) -> SimOutcome:
    """Mean uptake at the observed and the counterfactual columns.

    Raises:
        InsufficientData: fewer than 100 households
        SchemaMismatch: a model or subgroup column is missing
    """
    _check_population(population)
    missing = [c for c in subgroups if c not in population.columns]
    if missing:
        raise SchemaMismatch(list(subgroups), population.columns)
    base = model.uptake(population)
    counterfactual = model.uptake(apply_scenario(population, scenario, model))
    outcome = _outcome(scenario.label, base, counterfactual, population, subgroups)
    logger.info(
        "Scenario %s: %.4f -> %.4f", scenario.label, outcome.baseline_rate, outcome.counterfactual_rate
    )
    return outcome


def cost_benefit(
    outcome: SimOutcome,
    scenario: ScenarioSpec,
    costs: CostModel,
    population_size: int,
    *,
    n_villages: Optional[int] = None,
    n_platforms: int = 18,
) -> SimOutcome:
    """Attach cost, benefit and benefit/cost for a population of ``population_size``.

    Education scenarios train every non-user, social capital scenarios fund
    one group per ``villages_per_group`` villages and washing scenarios pay the
    regulator per platform. A zero cost leaves the ratio undefined (None).
    """
    if population_size <= 0:
        raise InvalidSpec("population_size must be positive")
    if n_villages is None:
        n_villages = math.ceil(population_size / costs.village_size)

    cost = 0.0
    if scenario.knowledge_multiplier != 1.0:
        cost += costs.training_cost_per_farmer * population_size * (1.0 - outcome.baseline_rate)
    if scenario.social_capital_multiplier != 1.0:
        cost += costs.group_setup_cost * math.ceil(n_villages / costs.villages_per_group)
    if scenario.changes_washing:
        cost += costs.regulator_cost_per_platform * n_platforms

    new_users = outcome.abs_change * population_size
    benefit = new_users * costs.value_per_user_year * costs.horizon_years
    return dataclasses.replace(
        outcome,
        new_users=new_users,
        cost=cost,
        benefit=benefit,
        cb_ratio=benefit / cost if cost > 0 else None,
    )


def simulation_frame(outcomes: Sequence[SimOutcome]) -> pd.DataFrame:
    """One row per scenario; changes in percentage points, subgroup deltas in pp."""
    rows = []
    for o in outcomes:
        row = {
            "scenario": o.label,
            "baseline_rate": o.baseline_rate,
            "usage_rate": o.counterfactual_rate,
            "abs_change_pp": 100.0 * o.abs_change,
            "rel_change": o.rel_change,
            "new_users": o.new_users,
            "cost": o.cost,
            "benefit": o.benefit,
            "cb_ratio": o.cb_ratio,
        }
        row.update({f"delta_pp[{k}]": 100.0 * v for k, v in o.subgroup_deltas.items()})
        rows.append(row)
    return pd.DataFrame(rows)


def simulation_text(outcomes: Sequence[SimOutcome]) -> str:
    frame = simulation_frame(outcomes)[
        ["scenario", "usage_rate", "abs_change_pp", "rel_change", "cost", "cb_ratio"]
    ]
    return format_table(frame, title="Counterfactual policy scenarios", note=f"order: {COMPOSITION_ORDER}")


# Sensitivity


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    """Perturbation spread per scenario and one-at-a-time elasticities.

    ``elasticities`` holds, per scenario and parameter, the signed change in
    the scenario effect (percentage points) when that parameter alone grows
    by 10%, recomputed from the model, and its absolute value as the elasticity.
    """

    summary: pd.DataFrame
    elasticities: pd.DataFrame
    ranking: tuple[str, ...]
    reps: int
    perturb_fraction: float
    seed: int

    def rank_of(self, parameter: str) -> int:
        return self.ranking.index(parameter) + 1

    def to_frame(self) -> pd.DataFrame:
        """``scenario,param,elasticity_rank,elasticity,nonlinear_change,median,lo,hi`` rows."""
        merged = self.elasticities.merge(self.summary, on="scenario", how="left")
        overall = pd.DataFrame(
            {
                "scenario": "overall",
                "param": list(self.ranking),
                "elasticity_rank": range(1, len(self.ranking) + 1),
                "elasticity": [
                    float(self.elasticities.loc[self.elasticities.param == p, "elasticity"].mean())
                    for p in self.ranking
                ],
            }
        )
        frame = pd.concat([merged, overall], ignore_index=True)
        columns = ["scenario", "param", "elasticity_rank", "elasticity", "nonlinear_change", "median", "lo", "hi"]
        return frame.reindex(columns=columns)


def sensitivity(
    population: pd.DataFrame,
    scenarios: Sequence[ScenarioSpec],
    model: SimModel,
    *,
    perturb_fraction: float = 0.2,
    reps: int = 1000,
    seed: int,
    threads: Optional[int] = None,
) -> SensitivityReport:
    """Uniform ±``perturb_fraction`` perturbations and one-at-a-time elasticities.

    Each replicate draws one factor per parameter from its own seeded
    stream. An elasticity is the absolute change, in percentage points, of a
    scenario effect when one parameter moves by 10% with the others at their
    point values; rankings order parameters by it within each scenario and
    by its mean across scenarios.

    Raises:
        InvalidSpec: fewer than 10 replicates or a negative fraction
    """
    if reps < MIN_SENSITIVITY_REPS:
        raise InvalidSpec(f"Sensitivity needs at least {MIN_SENSITIVITY_REPS} replicates")
    if not 0.0 <= perturb_fraction < 1.0:
        raise InvalidSpec("perturb_fraction must be in [0, 1)")
    _check_population(population)
    counterfactuals = [apply_scenario(population, s, model) for s in scenarios]

    def changes(m: SimModel) -> list[float]:
        base = float(np.mean(m.uptake(population)))
        return [float(np.mean(m.uptake(cf))) - base for cf in counterfactuals]

    def replicate(index: int) -> list[float]:
        rng = replicate_rng(seed, index)
        factors = rng.uniform(1.0 - perturb_fraction, 1.0 + perturb_fraction, size=len(PARAMETERS))
        return changes(model.perturbed(**dict(zip(PARAMETERS, factors))))

    draws = np.array(run_indexed(replicate, reps, threads))
    point = changes(model)
    summary = pd.DataFrame(
        {
            "scenario": [s.label for s in scenarios],
            "point": [100.0 * v for v in point],
            "median": 100.0 * np.median(draws, axis=0),
            "lo": 100.0 * np.percentile(draws, 5.0, axis=0),
            "hi": 100.0 * np.percentile(draws, 95.0, axis=0),
        }
    )

    rows = []
    stepped = {
        parameter: changes(model.perturbed(**{parameter: 1.0 + ELASTICITY_STEP}))
        for parameter in PARAMETERS
    }
    for i, (s, p) in enumerate(zip(scenarios, point)):
        for parameter in PARAMETERS:
            change = 100.0 * (stepped[parameter][i] - p)
            rows.append(
                {
                    "scenario": s.label,
                    "param": parameter,
                    "elasticity": abs(change),
                    "nonlinear_change": change,
                }
            )
    elasticities = pd.DataFrame(rows)
    elasticities["elasticity_rank"] = (
        elasticities.groupby("scenario", sort=False)["elasticity"]
        .rank(ascending=False, method="min")
        .astype(int)
    )
    means = elasticities.groupby("param", sort=False)["elasticity"].mean()
    ranking = tuple(sorted(PARAMETERS, key=lambda p: (-means[p], PARAMETERS.index(p))))
    logger.info("Sensitivity ranking: %s", ", ".join(ranking))
    return SensitivityReport(
        summary=summary,
        elasticities=elasticities,
        ranking=ranking,
        reps=reps,
        perturb_fraction=perturb_fraction,
        seed=seed,
    )


def scenario_from_mapping(values: Mapping[str, object]) -> ScenarioSpec:
    """Named preset (``{"preset": "S1"}``) or explicit fields."""
    preset = values.get("preset")
    if preset is not None:
        if preset not in SCENARIOS:
            raise InvalidSpec(f"Unknown scenario preset {preset!r}")
        base = SCENARIOS[str(preset)]
        overrides = {k: v for k, v in values.items() if k != "preset"}
        return dataclasses.replace(base, **overrides)
    return ScenarioSpec(**values)


__all__ = [
    "COMPOSITION_ORDER",
    "CostModel",
    "PARAMETERS",
    "SCENARIOS",
    "ScenarioSpec",
    "SensitivityReport",
    "SimModel",
    "SimOutcome",
    "apply_scenario",
    "cost_benefit",
    "default_scenarios",
    "fit_sim_model",
    "scenario_from_mapping",
    "sensitivity",
    "simulate",
    "simulation_frame",
    "simulation_text",
]
