"""Synthetic firm panels and household surveys with known ground truth.

A bundle is a pure function of ``(TruthConfig, seed)``: every random draw
comes from a counter-based stream of the master seed, and the calibration
solvers are deterministic.

Example:
    bundle = generate(TruthConfig(n_households=2000), seed=7)
    write_bundle(bundle, "bundle/")
"""

import dataclasses
import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import special, stats

from .calibration import (
    LogitCoefficient,
    Moment,
    calibrate_mediator,
    correlated_series,
    draw_rounded,
    exact_regression,
    ordinal_shift,
    solve_logit_index,
    tilt_to_mean,
    tilt_to_moments,
)
from .corpus_text import Document, default_lexicon
from .exceptions import InvalidSpec
from .glm import DesignMatrix, fit_ols
from .models import CapabilityRecord, Lexicon
from .utils import replicate_rng, tokenize
from .washing_index import IndexPanel, build_index, yearly_means

logger = logging.getLogger(__name__)

INDUSTRIES = ("payments", "lending", "wealth_management")
REGIONS = ("east", "central", "west")
PROVINCES_PER_REGION = (9, 8, 7)

CONTROL_COLUMNS = (
    "age",
    "education",
    "financial_literacy",
    "ln_income",
    "ln_wealth",
    "migrant",
    "ln_gdp_pc",
    "gender",
    "married",
    "health",
    "risk_attitude",
    "family_size",
    "internet_rate",
)

HOUSEHOLD_COLUMNS = (
    "household_id",
    "year",
    "firm_id",
    "province",
    "region",
    "ai_washing",
    "y1_use",
    "y2_breadth",
    "knowledge_exclusion",
    "risk_exclusion",
    "social_capital",
    "prior_use",
    "income",
    "wealth",
    *CONTROL_COLUMNS,
)

# Seven cut points separate the eight breadth levels 0..7
BREADTH_CUTS = (-1.5, -0.5, 0.5, 1.3, 2.1, 2.9, 3.8)
KNOWLEDGE_TOP = 4
RISK_TOP = 3

HEALTH_LEVELS = (0.05, 0.17, 0.35, 0.30, 0.13)
RISK_ATTITUDE_LEVELS = (0.25, 0.35, 0.20, 0.12, 0.08)

FILLER_WORDS = (
    "account", "annual", "balance", "bank", "branch", "business", "capital",
    "channel", "client", "company", "compliance", "cost", "credit", "customer",
    "deposit", "development", "digital", "division", "employees", "expansion",
    "fee", "growth", "income", "insurance", "investment", "lending", "liquidity",
    "loan", "management", "market", "merchant", "mobile", "network", "online",
    "operations", "partner", "payment", "platform", "product", "profit",
    "quarter", "regulatory", "report", "revenue", "rural", "savings",
    "segment", "service", "settlement", "shareholders", "strategy", "transaction",
    "users", "village", "wallet", "wealth", "year",
)

# Stream numbers under the master seed
_FIRMS, _DOCUMENTS, _GEOGRAPHY, _AUXILIARY, _HOUSEHOLDS, _IV, _SERIES = range(7)

_SQRT3 = math.sqrt(3.0)


def _pairs(value: object) -> tuple[tuple[str, float], ...]:
    if isinstance(value, Mapping):
        return tuple((str(k), float(v)) for k, v in value.items())
    return tuple((str(k), float(v)) for k, v in value)  # type: ignore[union-attr]


def _flatten(value: object) -> list[object]:
    if isinstance(value, tuple):
        return [v for item in value for v in _flatten(item)]
    return [value]


@dataclass(frozen=True)
class TruthConfig:
    """Sizes, calibration targets and true coefficients of a synthetic bundle.

    Defaults are the targets of the standard bundle: coefficient estimands
    and covariate moments of a rural household survey. Effects keyed by
    column live in ``(column, value)`` tuples so the config stays hashable.
    """

    n_firms: int = 18
    years: tuple[int, ...] = (2016, 2017, 2018, 2019)
    n_households: int = 6800
    aux_factor: int = 8
    iv_households: int = 6800

    # Firm-level index and usage trajectory
    yearly_means: tuple[float, ...] = (-0.28, -0.15, 0.52, 0.76)
    usage_mean: float = 0.205
    usage_spread: float = 0.04
    usage_correlation: float = -0.76
    breadth_slope: float = -1.24
    breadth_t: float = -8.67
    breadth_centre: float = 2.5
    household_washing_mean: float = 0.421
    household_washing_sd: float = 0.874

    # Mediation, moderation and heterogeneity estimands
    a1: float = 0.348
    a2: float = 0.312
    b1: float = -0.432
    b2: float = -0.487
    direct_effect: float = -0.134
    moderation: float = 0.156
    social_capital_effect: float = 0.087
    # Starting value; the outcome loading on the shared confounder is solved
    outcome_confounding: float = -0.8
    education_diff: float = 0.225
    age_diff: float = 0.176
    experience_diff: float = 0.211
    education_cut: int = 9
    elderly_age: int = 60
    breadth_effect: float = -0.295
    baseline_effect: float = -0.287

    # Outcome and mediator levels
    use_rate: float = 0.243
    breadth_mean: float = 1.832
    knowledge_mean: float = 2.087
    risk_mean: float = 1.823
    knowledge_noise: float = 1.5
    risk_noise: float = 1.25
    knowledge_confounding: float = 0.6
    risk_confounding: float = 0.45

    control_effects: tuple[tuple[str, float], ...] = (
        ("age", -0.016),
        ("education", 0.079),
        ("financial_literacy", 0.231),
        ("ln_income", 0.312),
        ("ln_wealth", 0.156),
        ("migrant", 0.234),
        ("ln_gdp_pc", 0.189),
        ("gender", 0.05),
        ("married", 0.08),
        ("health", 0.06),
        ("risk_attitude", 0.09),
        ("family_size", -0.03),
        ("internet_rate", 0.4),
    )
    breadth_control_effects: tuple[tuple[str, float], ...] = (
        ("age", -0.017),
        ("education", 0.083),
        ("financial_literacy", 0.243),
        ("ln_income", 0.328),
        ("ln_wealth", 0.164),
        ("migrant", 0.247),
        ("ln_gdp_pc", 0.198),
        ("gender", 0.05),
        ("married", 0.08),
        ("health", 0.06),
        ("risk_attitude", 0.09),
        ("family_size", -0.03),
        ("internet_rate", 0.4),
    )
    knowledge_control_effects: tuple[tuple[str, float], ...] = (
        ("age", 0.012),
        ("education", -0.06),
        ("financial_literacy", -0.12),
        ("ln_income", -0.05),
    )
    risk_control_effects: tuple[tuple[str, float], ...] = (
        ("age", 0.008),
        ("education", -0.03),
        ("financial_literacy", -0.08),
        ("ln_income", -0.04),
    )

    # Covariate moments
    age_mean: float = 53.689
    age_sd: float = 12.345
    age_range: tuple[float, float] = (18.0, 85.0)
    education_mean: float = 8.234
    education_sd: float = 3.567
    education_range: tuple[float, float] = (0.0, 16.0)
    literacy_mean: float = 2.123
    literacy_sd: float = 1.456
    literacy_range: tuple[float, float] = (0.0, 5.0)
    income_log_mean: float = 1.036
    income_log_sd: float = 0.973
    income_range: tuple[float, float] = (0.2, 45.2)
    wealth_log_mean: float = 2.411
    wealth_log_sd: float = 1.021
    wealth_range: tuple[float, float] = (0.1, 280.5)
    social_capital_shape: float = 1.289
    social_capital_scale: float = 2.456
    social_capital_max: float = 18.643
    migrant_rate: float = 0.473
    prior_use_rate: float = 0.243
    male_head_rate: float = 0.9
    married_rate: float = 0.824
    family_size_extra: float = 2.8

    # Instrument scenario
    iv_industry_loading: float = 0.723
    iv_age_loading: float = -0.034
    iv_effect: float = -0.06
    iv_confounding: float = 0.5
    iv_base_rate: float = 0.3

    def __post_init__(self) -> None:
        for name in (
            "years",
            "yearly_means",
            "age_range",
            "education_range",
            "literacy_range",
            "income_range",
            "wealth_range",
        ):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in (
            "control_effects",
            "breadth_control_effects",
            "knowledge_control_effects",
            "risk_control_effects",
        ):
            object.__setattr__(self, name, _pairs(getattr(self, name)))

        if self.n_households < 500:
            raise InvalidSpec(f"n_households must be at least 500, got {self.n_households}")
        if not 2 <= self.n_firms <= 100:
            raise InvalidSpec(f"n_firms must be in [2, 100], got {self.n_firms}")
        if self.aux_factor < 1 or self.iv_households < 500:
            raise InvalidSpec("aux_factor must be >= 1 and iv_households >= 500")
        if len(self.years) < 2 or len(self.yearly_means) != len(self.years):
            raise InvalidSpec("yearly_means needs one target per year (at least two years)")
        for f in dataclasses.fields(self):
            if any(isinstance(v, float) and not math.isfinite(v) for v in _flatten(getattr(self, f.name))):
                raise InvalidSpec(f"{f.name} must be finite")
        unknown = {c for c, _ in self.control_effects + self.breadth_control_effects} - set(CONTROL_COLUMNS)
        unknown |= {c for c, _ in self.knowledge_control_effects + self.risk_control_effects} - set(
            CONTROL_COLUMNS
        )
        if unknown:
            raise InvalidSpec(f"Effects name unknown controls: {sorted(unknown)}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "TruthConfig":
        """Build a config from overrides such as a parsed TOML table.

        Raises:
            InvalidSpec: a key is not a config field
        """
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise InvalidSpec(f"Unknown datagen settings: {sorted(unknown)}")
        return cls(**values)  # type: ignore[arg-type]

    @property
    def survey_year(self) -> int:
        return self.years[-1]

    @property
    def social_capital_mean(self) -> float:
        return self.social_capital_shape * self.social_capital_scale

    def truth_values(self) -> dict[str, float]:
        """Estimands fixed by the config itself, under their oracle names."""
        return {
            "baseline.ai_washing": self.baseline_effect,
            "mediation.a1": self.a1,
            "mediation.a2": self.a2,
            "mediation.b1": self.b1,
            "mediation.b2": self.b2,
            "mediation.c_prime": self.direct_effect,
            "mediation.indirect_1": self.a1 * self.b1,
            "mediation.indirect_2": self.a2 * self.b2,
            "moderation.interaction": self.moderation,
            "ordered.ai_washing": self.breadth_effect,
            "heterogeneity.education": self.education_diff,
            "heterogeneity.age": self.age_diff,
            "heterogeneity.experience": self.experience_diff,
            "iv.effect": self.iv_effect,
            "iv.first_stage.industry_mean_washing": self.iv_industry_loading,
            "iv.first_stage.firm_age": self.iv_age_loading,
        }


@dataclass(frozen=True, eq=False)
class FirmPanel:
    """Firm capability records, documents and the platform-level series."""

    records: tuple[CapabilityRecord, ...]
    documents: tuple[Document, ...]
    lexicon: Lexicon
    industries: dict[str, str]
    founded: dict[str, int]
    shares: dict[tuple[str, int], float]
    usage_rates: dict[int, float]
    breadth: dict[str, float]
    index: IndexPanel

    @property
    def firm_ids(self) -> list[str]:
        return sorted(self.industries)

    def survey_values(self, year: int) -> np.ndarray:
        """Index values of every firm in ``year``, in ``firm_ids`` order."""
        lookup = self.index.washing.as_dict()
        return np.array([lookup[(f, year)] for f in self.firm_ids])

    def firms_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "firm_id": [r.firm_id for r in self.records],
                "year": [r.year for r in self.records],
                "talent_share": [r.talent_share for r in self.records],
                "patent_count": [r.patent_count for r in self.records],
                "rd_intensity": [r.rd_intensity for r in self.records],
            }
        )
        frame["industry"] = frame["firm_id"].map(self.industries)
        frame["founded"] = frame["firm_id"].map(self.founded)
        frame["platform_share"] = [self.shares[(f, y)] for f, y in zip(frame.firm_id, frame.year)]
        return frame.sort_values(["year", "firm_id"], kind="mergesort").reset_index(drop=True)

    def usage_frame(self) -> pd.DataFrame:
        years = sorted(self.usage_rates)
        return pd.DataFrame({"year": years, "usage_rate": [self.usage_rates[y] for y in years]})

    def platforms_frame(self) -> pd.DataFrame:
        firms = self.firm_ids
        return pd.DataFrame({"firm_id": firms, "product_breadth": [self.breadth[f] for f in firms]})


@dataclass(frozen=True, eq=False)
class SyntheticBundle:
    config: TruthConfig
    seed: int
    firms: FirmPanel
    households: pd.DataFrame
    iv_sample: pd.DataFrame
    truth: dict[str, float] = field(default_factory=dict)


# Firms


def _filler_vocabulary(lexicon: Lexicon) -> tuple[str, ...]:
    reserved = {token for phrase in lexicon.phrases for token in tokenize(phrase)}
    return tuple(w for w in FILLER_WORDS if w not in reserved)


def _document_text(
    rng: np.random.Generator,
    phrases: Sequence[str],
    preference: np.ndarray,
    filler: Sequence[str],
    length: int,
    rate: float,
) -> str:
    hits = int(rng.poisson(length * rate))
    units = [phrases[i] for i in rng.choice(len(phrases), size=hits, p=preference)]
    units += [filler[i] for i in rng.integers(len(filler), size=max(length - hits, 0))]
    order = rng.permutation(len(units))
    lines = [" ".join(units[i] for i in order[start : start + 16]) for start in range(0, len(order), 16)]
    return "\n".join(lines) + "\n"


def gen_firms(config: TruthConfig, seed: int, lexicon: Optional[Lexicon] = None) -> FirmPanel:
    """Draw capability records and documents, then calibrate platform series.

    Platform user shares are tilted within each year so the share-weighted
    index means equal ``config.yearly_means``; the usage series and the
    breadth cross-section are then built to hit their targets exactly.

    Raises:
        CalibrationFailure: a yearly mean lies outside that year's index range
    """
    lexicon = lexicon or default_lexicon()
    rng = replicate_rng(seed, _FIRMS)
    doc_rng = replicate_rng(seed, _DOCUMENTS)
    firm_ids = [f"P{i + 1:02d}" for i in range(config.n_firms)]
    industries = {f: INDUSTRIES[i % len(INDUSTRIES)] for i, f in enumerate(firm_ids)}
    founded = {f: int(y) for f, y in zip(firm_ids, rng.integers(1998, 2015, size=config.n_firms))}
    quality = rng.standard_normal(config.n_firms)
    hype = rng.standard_normal(config.n_firms)

    phrases = lexicon.phrases
    filler = _filler_vocabulary(lexicon)
    preferences = doc_rng.dirichlet(np.full(len(phrases), 0.5), size=config.n_firms)

    records: list[CapabilityRecord] = []
    documents: list[Document] = []
    for j, year in enumerate(config.years):
        talent = special.expit(-2.0 + 0.5 * quality + 0.15 * j + 0.2 * rng.standard_normal(config.n_firms))
        patents = rng.poisson(np.exp(1.5 + 0.7 * quality + 0.25 * j))
        rd = np.exp(-3.2 + 0.35 * quality + 0.05 * j + 0.25 * rng.standard_normal(config.n_firms))
        lengths = doc_rng.integers(1200, 2401, size=config.n_firms)
        for i, firm in enumerate(firm_ids):
            records.append(
                CapabilityRecord(firm, year, round(float(talent[i]), 6), int(patents[i]), round(float(rd[i]), 6))
            )
            rate = math.exp(-4.0 + 0.6 * hype[i] + 0.2 * j)
            text = _document_text(doc_rng, phrases, preferences[i], filler, int(lengths[i]), rate)
            documents.append(Document(firm, year, text))

    index = build_index(documents, records, lexicon)

    shares: dict[tuple[str, int], float] = {}
    for year, target in zip(config.years, config.yearly_means):
        entries = index.washing.for_year(year)
        weights = tilt_to_mean([e.value for e in entries], target)
        shares.update({(e.firm_id, year): round(float(w), 12) for e, w in zip(entries, weights)})

    means = yearly_means(index.washing, shares)
    series_rng = replicate_rng(seed, _SERIES)
    usage = correlated_series(
        [means[y] for y in config.years],
        config.usage_correlation,
        mean=config.usage_mean,
        spread=config.usage_spread,
        rng=series_rng,
    )
    survey = index.washing.for_year(config.survey_year)
    breadth = exact_regression(
        [e.value for e in survey],
        slope=config.breadth_slope,
        t_value=config.breadth_t,
        centre=config.breadth_centre,
        rng=series_rng,
    )
    logger.info(
        "Generated %d firms over %d years; weighted means %s",
        config.n_firms,
        len(config.years),
        ", ".join(f"{y}:{m:.3f}" for y, m in means.items()),
    )
    return FirmPanel(
        records=tuple(records),
        documents=tuple(documents),
        lexicon=lexicon,
        industries=industries,
        founded=founded,
        shares=shares,
        usage_rates={y: float(u) for y, u in zip(config.years, usage)},
        breadth={e.firm_id: float(b) for e, b in zip(survey, breadth)},
        index=index,
    )


# Households


class _Geography(NamedTuple):
    province: np.ndarray
    region: np.ndarray
    ln_gdp_pc: np.ndarray
    internet_rate: np.ndarray


def _geography(seed: int) -> _Geography:
    rng = replicate_rng(seed, _GEOGRAPHY)
    gdp_levels = {"east": 11.2, "central": 10.8, "west": 10.6}
    internet_levels = {"east": 0.72, "central": 0.62, "west": 0.55}
    regions = np.repeat(REGIONS, PROVINCES_PER_REGION)
    n = len(regions)
    gdp = np.array([gdp_levels[r] for r in regions]) + rng.normal(0.0, 0.15, n)
    internet = np.array([internet_levels[r] for r in regions]) + rng.normal(0.0, 0.05, n)
    return _Geography(
        province=np.array([f"R{i + 1:02d}" for i in range(n)]),
        region=regions,
        ln_gdp_pc=np.round(gdp, 4),
        internet_rate=np.round(np.clip(internet, 0.3, 0.95), 4),
    )


class _Latent(NamedTuple):
    confounder: np.ndarray
    knowledge_noise: np.ndarray
    risk_noise: np.ndarray
    use_draw: np.ndarray
    breadth_noise: np.ndarray


def _truncated_integer(
    rng: np.random.Generator, mean: float, sd: float, bounds: tuple[float, float], n: int
) -> np.ndarray:
    lo, hi = bounds
    draws = stats.truncnorm.rvs((lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd, size=n, random_state=rng)
    return np.clip(np.rint(draws), lo, hi).astype(int)


def _clipped(name: str, values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    outside = int(np.sum((values < lo) | (values > hi)))
    if outside:
        logger.warning("Clipped %d %s draws to [%g, %g]", outside, name, lo, hi)
    return np.clip(values, lo, hi)


def _draw_population(
    config: TruthConfig,
    n: int,
    rng: np.random.Generator,
    geography: _Geography,
    firm_ids: Sequence[str],
    washing_values: np.ndarray,
    probabilities: np.ndarray,
) -> tuple[pd.DataFrame, _Latent]:
    c = config
    income = np.round(_clipped("income", np.exp(rng.normal(c.income_log_mean, c.income_log_sd, n)), *c.income_range), 4)
    wealth = np.round(_clipped("wealth", np.exp(rng.normal(c.wealth_log_mean, c.wealth_log_sd, n)), *c.wealth_range), 4)
    social = rng.gamma(c.social_capital_shape, c.social_capital_scale, n)
    province = rng.integers(len(geography.province), size=n)
    firm = rng.choice(len(firm_ids), size=n, p=probabilities)

    frame = pd.DataFrame(
        {
            "household_id": [f"H{i + 1:06d}" for i in range(n)],
            "year": c.survey_year,
            "firm_id": np.asarray(firm_ids)[firm],
            "province": geography.province[province],
            "region": geography.region[province],
            "ai_washing": washing_values[firm],
            "social_capital": np.round(_clipped("social_capital", social, 0.0, c.social_capital_max), 4),
            "prior_use": (rng.random(n) < c.prior_use_rate).astype(int),
            "income": income,
            "wealth": wealth,
            "age": _truncated_integer(rng, c.age_mean, c.age_sd, c.age_range, n),
            "education": _truncated_integer(rng, c.education_mean, c.education_sd, c.education_range, n),
            "financial_literacy": _truncated_integer(rng, c.literacy_mean, c.literacy_sd, c.literacy_range, n),
            "ln_income": np.log(income),
            "ln_wealth": np.log(wealth),
            "migrant": (rng.random(n) < c.migrant_rate).astype(int),
            "ln_gdp_pc": geography.ln_gdp_pc[province],
            "gender": (rng.random(n) < c.male_head_rate).astype(int),
            "married": (rng.random(n) < c.married_rate).astype(int),
            "health": rng.choice(np.arange(1, 6), size=n, p=HEALTH_LEVELS),
            "risk_attitude": rng.choice(np.arange(1, 6), size=n, p=RISK_ATTITUDE_LEVELS),
            "family_size": 1 + rng.poisson(c.family_size_extra, n),
            "internet_rate": geography.internet_rate[province],
        }
    )
    latent = _Latent(
        confounder=rng.uniform(-_SQRT3, _SQRT3, n),
        knowledge_noise=rng.uniform(-c.knowledge_noise, c.knowledge_noise, n),
        risk_noise=rng.uniform(-c.risk_noise, c.risk_noise, n),
        use_draw=rng.random(n),
        breadth_noise=rng.logistic(size=n),
    )
    return frame, latent


def _linear(frame: pd.DataFrame, effects: Sequence[tuple[str, float]]) -> np.ndarray:
    out = np.zeros(len(frame))
    for column, coef in effects:
        out += coef * frame[column].to_numpy(dtype=float)
    return out


def _design(frame: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    return DesignMatrix.from_frame(frame, list(columns)).values


class _Subgroups(NamedTuple):
    vulnerable: np.ndarray  # low education
    elderly: np.ndarray
    first_time: np.ndarray


def _subgroups(frame: pd.DataFrame, config: TruthConfig) -> _Subgroups:
    return _Subgroups(
        vulnerable=(frame["education"] <= config.education_cut).to_numpy(),
        elderly=(frame["age"] >= config.elderly_age).to_numpy(),
        first_time=(frame["prior_use"] == 0).to_numpy(),
    )


OUTCOME_TERMS = (
    "intercept",
    "direct",
    "knowledge",
    "risk",
    "moderation",
    "education_gap",
    "age_gap",
    "experience_gap",
    "confounding",
)


def _outcome_features(
    frame: pd.DataFrame, latent: _Latent, config: TruthConfig, shares: np.ndarray
) -> np.ndarray:
    """Columns multiplying the calibrated outcome coefficients, in OUTCOME_TERMS order.

    Subgroup gaps enter as treatment × (indicator − population share), so
    they leave the average treatment slope unchanged. The unobserved
    confounder also loads on both mediators; its outcome loading sets how far
    the baseline logit falls short of the direct plus mediated paths.
    """
    w = frame["ai_washing"].to_numpy(dtype=float)
    sc = frame["social_capital"].to_numpy(dtype=float)
    groups = _subgroups(frame, config)
    return np.column_stack(
        [
            np.ones(len(frame)),
            w,
            frame["knowledge_exclusion"].to_numpy(dtype=float),
            frame["risk_exclusion"].to_numpy(dtype=float),
            (w - config.household_washing_mean) * (sc - config.social_capital_mean),
            w * (groups.vulnerable - shares[0]),
            w * (groups.elderly - shares[1]),
            w * (groups.first_time - shares[2]),
            latent.confounder,
        ]
    )


def _outcome_offset(frame: pd.DataFrame, config: TruthConfig) -> np.ndarray:
    return (
        config.social_capital_effect * frame["social_capital"].to_numpy(dtype=float)
        + _linear(frame, config.control_effects)
    )


def _outcome_moments(frame: pd.DataFrame, config: TruthConfig) -> list[Moment]:
    """Estimands the pipeline reports, evaluated on calibrated probabilities."""
    controls = list(CONTROL_COLUMNS)
    w = frame["ai_washing"].to_numpy(dtype=float)
    baseline = _design(frame, ["ai_washing", *controls])
    mediation = _design(frame, ["ai_washing", "knowledge_exclusion", "risk_exclusion", *controls])
    moderated = frame.assign(_product=w * frame["social_capital"].to_numpy(dtype=float))
    moderation = _design(moderated, ["ai_washing", "social_capital", "_product", *controls])
    groups = _subgroups(frame, config)

    def difference(high: np.ndarray, dropped: Optional[str]) -> Callable[[np.ndarray], float]:
        design = _design(frame, ["ai_washing", *(c for c in controls if c != dropped)])
        upper = LogitCoefficient(design, 1, high)
        lower = LogitCoefficient(design, 1, ~high)
        return lambda p: upper(p) - lower(p)

    return [
        Moment("use rate", config.use_rate, lambda p: float(p.mean())),
        Moment("direct effect", config.direct_effect, LogitCoefficient(mediation, 1)),
        Moment("knowledge path", config.b1, LogitCoefficient(mediation, 2)),
        Moment("risk path", config.b2, LogitCoefficient(mediation, 3)),
        Moment("moderation", config.moderation, LogitCoefficient(moderation, 3)),
        Moment("education gap", config.education_diff, difference(~groups.vulnerable, "education")),
        Moment("age gap", config.age_diff, difference(~groups.elderly, "age")),
        Moment("experience gap", config.experience_diff, difference(~groups.first_time, None)),
        Moment("baseline", config.baseline_effect, LogitCoefficient(baseline, 1)),
    ]


def _add_mediators(
    frames: Sequence[tuple[pd.DataFrame, _Latent]], config: TruthConfig, truth: dict[str, float]
) -> None:
    """Calibrate both mediators on the first frame, then draw them into all frames."""
    aux, aux_latent = frames[0]
    w = aux["ai_washing"].to_numpy(dtype=float)
    design = _design(aux, ["ai_washing", *CONTROL_COLUMNS])
    specs = (
        ("knowledge_exclusion", "knowledge", config.a1, config.knowledge_mean, config.knowledge_noise,
         KNOWLEDGE_TOP, config.knowledge_control_effects, config.knowledge_confounding, "knowledge_noise"),
        ("risk_exclusion", "risk", config.a2, config.risk_mean, config.risk_noise,
         RISK_TOP, config.risk_control_effects, config.risk_confounding, "risk_noise"),
    )
    for column, label, slope, mean, half_width, top, effects, loading, noise in specs:
        base = _linear(aux, effects) + loading * aux_latent.confounder
        solved = calibrate_mediator(
            base, w, design, mean=mean, slope=slope, half_width=half_width, top=top, label=column
        )
        truth[f"structural.{label}_intercept"] = solved.intercept
        truth[f"structural.{label}_loading"] = solved.slope
        for frame, latent in frames:
            latent_value = (
                solved.intercept
                + solved.slope * frame["ai_washing"].to_numpy(dtype=float)
                + _linear(frame, effects)
                + loading * latent.confounder
            )
            frame[column] = draw_rounded(latent_value, getattr(latent, noise), top)


def gen_households(
    config: TruthConfig, seed: int, firms: FirmPanel
) -> tuple[pd.DataFrame, dict[str, float]]:
    """Draw the household survey and solve for its structural coefficients.

    Calibration runs on an auxiliary population ``aux_factor`` times larger
    than the sample; the truth values are that population's estimands.

    Raises:
        CalibrationFailure: a moment or estimand target cannot be reached
    """
    washing_values = firms.survey_values(config.survey_year)
    probabilities = tilt_to_moments(
        washing_values, config.household_washing_mean, config.household_washing_sd
    )
    geography = _geography(seed)
    draw = dict(geography=geography, firm_ids=firms.firm_ids, washing_values=washing_values, probabilities=probabilities)
    aux = _draw_population(config, config.n_households * config.aux_factor, replicate_rng(seed, _AUXILIARY), **draw)
    main = _draw_population(config, config.n_households, replicate_rng(seed, _HOUSEHOLDS), **draw)

    truth: dict[str, float] = {}
    _add_mediators([aux, main], config, truth)

    aux_frame, aux_latent = aux
    groups = _subgroups(aux_frame, config)
    shares = np.array([groups.vulnerable.mean(), groups.elderly.mean(), groups.first_time.mean()])
    features = _outcome_features(aux_frame, aux_latent, config, shares)
    offset = _outcome_offset(aux_frame, config)

    start = np.array(
        [
            0.0,
            config.direct_effect,
            config.b1,
            config.b2,
            config.moderation,
            -config.education_diff,
            -config.age_diff,
            -config.experience_diff,
            config.outcome_confounding,
        ]
    )
    level = special.logit(config.use_rate)
    start[0] = level - float(np.mean(offset + features[:, 1:] @ start[1:]))
    theta = solve_logit_index(features, offset, _outcome_moments(aux_frame, config), start)

    frame, latent = main
    probabilities_main = special.expit(
        _outcome_offset(frame, config) + _outcome_features(frame, latent, config, shares) @ theta
    )
    frame["y1_use"] = (latent.use_draw < probabilities_main).astype(int)

    eta_aux = config.breadth_effect * aux_frame["ai_washing"].to_numpy(dtype=float) + _linear(
        aux_frame, config.breadth_control_effects
    )
    shift = ordinal_shift(eta_aux, BREADTH_CUTS, config.breadth_mean)
    cuts = np.asarray(BREADTH_CUTS) + shift
    eta = config.breadth_effect * frame["ai_washing"].to_numpy(dtype=float) + _linear(
        frame, config.breadth_control_effects
    )
    frame["y2_breadth"] = ((eta + latent.breadth_noise)[:, None] > cuts).sum(axis=1)

    truth.update({f"structural.{name}": float(v) for name, v in zip(OUTCOME_TERMS, theta)})
    truth.update(
        {
            "structural.social_capital": config.social_capital_effect,
            "structural.education_share": float(shares[0]),
            "structural.elderly_share": float(shares[1]),
            "structural.first_time_share": float(shares[2]),
        }
    )
    truth.update({f"structural.breadth_cut_{k + 1}": float(c) for k, c in enumerate(cuts)})
    logger.info(
        "Generated %d households: use rate %.3f, confounder loading %.4f",
        len(frame),
        frame["y1_use"].mean(),
        truth["structural.confounding"],
    )
    return frame[list(HOUSEHOLD_COLUMNS)], truth


def gen_iv_sample(config: TruthConfig, seed: int, n: Optional[int] = None) -> pd.DataFrame:
    """Household sample whose first stage has the configured instrument loadings.

    The outcome is a linear probability in the index; a shared bounded
    confounder raises both the index and use, so OLS is biased upwards.
    """
    n = n or config.iv_households
    rng = replicate_rng(seed, _IV)
    confounder = rng.uniform(-_SQRT3, _SQRT3, n)
    industry_mean = np.round(rng.normal(0.3, 0.5, n), 6)
    firm_age = rng.integers(3, 26, size=n)
    education = _truncated_integer(rng, config.education_mean, config.education_sd, config.education_range, n)
    age = _truncated_integer(rng, config.age_mean, config.age_sd, config.age_range, n)
    literacy = _truncated_integer(rng, config.literacy_mean, config.literacy_sd, config.literacy_range, n)
    ln_income = np.round(rng.normal(config.income_log_mean, config.income_log_sd, n), 6)
    washing = (
        0.1
        + config.iv_industry_loading * industry_mean
        + config.iv_age_loading * firm_age
        + 0.02 * education
        + config.iv_confounding * confounder
        + rng.normal(0.0, 0.45, n)
    )
    probability = _clipped(
        "iv use probability",
        config.iv_base_rate
        + config.iv_effect * (washing - config.household_washing_mean)
        + 0.08 * confounder
        + 0.01 * (education - config.education_mean),
        0.01,
        0.99,
    )
    return pd.DataFrame(
        {
            "household_id": [f"V{i + 1:06d}" for i in range(n)],
            "y1_use": (rng.random(n) < probability).astype(int),
            "ai_washing": washing,
            "industry_mean_washing": industry_mean,
            "firm_age": firm_age,
            "age": age,
            "education": education,
            "financial_literacy": literacy,
            "ln_income": ln_income,
        }
    )


def generate(config: TruthConfig, seed: int, lexicon: Optional[Lexicon] = None) -> SyntheticBundle:
    """Generate a complete bundle: firm panel, households, IV sample and truth."""
    firms = gen_firms(config, seed, lexicon)
    households, structural = gen_households(config, seed, firms)
    truth: dict[str, float] = {
        "seed": float(seed),
        "n_households": float(config.n_households),
        "n_firms": float(config.n_firms),
        "survey_year": float(config.survey_year),
        "target.use_rate": config.use_rate,
        "target.breadth_mean": config.breadth_mean,
        "target.knowledge_mean": config.knowledge_mean,
        "target.risk_mean": config.risk_mean,
        "target.washing_mean": config.household_washing_mean,
        "target.washing_sd": config.household_washing_sd,
        "design.knowledge_noise": config.knowledge_noise,
        "design.risk_noise": config.risk_noise,
        "design.knowledge_confounding": config.knowledge_confounding,
        "design.risk_confounding": config.risk_confounding,
        "design.iv_confounding": config.iv_confounding,
    }
    truth.update({f"target.yearly_mean.{y}": m for y, m in zip(config.years, config.yearly_means)})
    truth.update(config.truth_values())
    truth.update(structural)
    return SyntheticBundle(
        config=config,
        seed=seed,
        firms=firms,
        households=households,
        iv_sample=gen_iv_sample(config, seed),
        truth=truth,
    )


# Bundle files


class BundlePaths(NamedTuple):
    root: Path
    lexicon: Path
    corpus_dir: Path
    firms_csv: Path
    households_csv: Path
    usage_csv: Path
    platforms_csv: Path
    iv_csv: Path
    truth: Path


def bundle_paths(directory: str | Path) -> BundlePaths:
    root = Path(directory)
    return BundlePaths(
        root=root,
        lexicon=root / "lexicon.txt",
        corpus_dir=root / "corpus",
        firms_csv=root / "firms.csv",
        households_csv=root / "households.csv",
        usage_csv=root / "usage_rates.csv",
        platforms_csv=root / "platforms.csv",
        iv_csv=root / "iv_households.csv",
        truth=root / "truth.txt",
    )


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def _format_value(value: float) -> str:
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def write_bundle(bundle: SyntheticBundle, directory: str | Path) -> BundlePaths:
    """Write every bundle file under ``directory`` and return their paths."""
    paths = bundle_paths(directory)
    paths.corpus_dir.mkdir(parents=True, exist_ok=True)
    for doc in bundle.firms.documents:
        (paths.corpus_dir / f"{doc.firm_id}_{doc.year}.txt").write_text(doc.text, encoding="utf-8")

    lexicon_lines = ["# phrase<TAB>weight"]
    lexicon_lines += [f"{e.phrase}\t{e.weight:g}" for e in bundle.firms.lexicon.entries]
    paths.lexicon.write_text("\n".join(lexicon_lines) + "\n", encoding="utf-8")

    _write_csv(bundle.firms.firms_frame(), paths.firms_csv)
    _write_csv(bundle.households, paths.households_csv)
    _write_csv(bundle.firms.usage_frame(), paths.usage_csv)
    _write_csv(bundle.firms.platforms_frame(), paths.platforms_csv)
    _write_csv(bundle.iv_sample, paths.iv_csv)

    lines = [f"{key}={_format_value(value)}" for key, value in sorted(bundle.truth.items())]
    paths.truth.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote bundle to %s", paths.root)
    return paths


def read_truth(path: str | Path) -> dict[str, float]:
    """Parse a flat ``key=value`` truth manifest; ``#`` starts a comment line."""
    truth: dict[str, float] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        try:
            truth[key.strip()] = float(value)
        except ValueError:
            logger.warning("Ignoring non-numeric truth entry %s", key.strip())
    return truth


# Verification


@dataclass(frozen=True)
class OracleReport:
    """Per-parameter recovery check of estimates against the truth manifest."""

    frame: pd.DataFrame
    level: float = 0.95

    @property
    def checked(self) -> int:
        return int((self.frame["status"] == "checked").sum())

    @property
    def coverage(self) -> float:
        """Share of checked parameters whose CI covers the truth (NaN if none)."""
        covered = self.frame.loc[self.frame["status"] == "checked", "covered"]
        return float(covered.astype(float).mean()) if len(covered) else float("nan")


def oracle_report(
    truth: Mapping[str, float],
    estimates: Mapping[str, tuple[float, float]],
    *,
    level: float = 0.95,
) -> OracleReport:
    """Compare ``name → (estimate, se)`` pairs with their true values.

    Parameters missing from ``truth`` are reported as unchecked.
    """
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    rows = []
    for name in sorted(estimates):
        estimate, se = (float(v) for v in estimates[name])
        lo, hi = estimate - z * se, estimate + z * se
        value = truth.get(name)
        if value is None or not math.isfinite(se):
            rows.append((name, math.nan, estimate, se, lo, hi, pd.NA, "unchecked"))
            continue
        rows.append((name, float(value), estimate, se, lo, hi, bool(lo <= value <= hi), "checked"))
    frame = pd.DataFrame(
        rows, columns=["parameter", "truth", "estimate", "se", "ci_lo", "ci_hi", "covered", "status"]
    )
    frame["covered"] = frame["covered"].astype("boolean")
    report = OracleReport(frame, level)
    if report.checked:
        logger.info("Oracle coverage %.3f over %d parameters", report.coverage, report.checked)
    return report


class SelfTest(NamedTuple):
    parameter: str
    truth: float
    estimate: float
    se: float
    lower: float
    upper: float

    @property
    def covered(self) -> bool:
        return self.lower <= self.truth <= self.upper


def structural_self_test(bundle: SyntheticBundle, level: float = 0.95) -> SelfTest:
    """Regress the knowledge mediator on the index and controls; compare with a₁."""
    frame = bundle.households
    design = DesignMatrix.from_frame(frame, ["ai_washing", *CONTROL_COLUMNS])
    fit = fit_ols(design, frame["knowledge_exclusion"], outcome="knowledge_exclusion")
    lower, upper = fit.confidence_interval("ai_washing", level)
    result = SelfTest(
        "mediation.a1",
        bundle.config.a1,
        fit.coefficients["ai_washing"],
        fit.std_errors["ai_washing"],
        lower,
        upper,
    )
    if not result.covered:
        logger.warning(
            "Self-test: a1 estimate %.4f [%.4f, %.4f] misses truth %.4f",
            result.estimate, lower, upper, result.truth,
        )
    return result


__all__ = [
    "BREADTH_CUTS",
    "BundlePaths",
    "CONTROL_COLUMNS",
    "FirmPanel",
    "HOUSEHOLD_COLUMNS",
    "OracleReport",
    "SelfTest",
    "SyntheticBundle",
    "TruthConfig",
    "bundle_paths",
    "gen_firms",
    "gen_households",
    "gen_iv_sample",
    "generate",
    "oracle_report",
    "read_truth",
    "structural_self_test",
    "write_bundle",
]
