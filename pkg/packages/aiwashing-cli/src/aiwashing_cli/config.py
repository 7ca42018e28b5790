"""Run configuration: one TOML file validated into a pydantic model tree."""

import hashlib
import json
import tomllib
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from aiwashing import Standardization, TruthConfig
from aiwashing.datagen import bundle_paths
from aiwashing.exceptions import InvalidSpec
from aiwashing.policy import CostModel, ScenarioSpec, scenario_from_mapping

DEFAULT_OUT_DIR = Path("aiwashing-out")
BUNDLE_DIR = "bundle"

DEFAULT_CONTROLS = (
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
DEFAULT_HEAD_CONTROLS = ("age", "gender", "education", "married", "health")

# Stages that draw random numbers and so need a master seed
STOCHASTIC_STAGES = ("generate", "bootstrap", "simulate")


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class InputsConfig(Section):
    """Input files. A missing lexicon means the packaged default lexicon."""

    lexicon: Optional[Path] = None
    corpus_dir: Optional[Path] = None
    firms_csv: Optional[Path] = None
    households_csv: Optional[Path] = None
    usage_csv: Optional[Path] = None
    platforms_csv: Optional[Path] = None
    iv_csv: Optional[Path] = None
    truth: Optional[Path] = None

    def files(self) -> dict[str, Path]:
        return {name: path for name, path in self if path is not None}


class StagesConfig(Section):
    index: bool = True
    fit: bool = True
    mediate: bool = True
    bootstrap: bool = True
    moderate: bool = True
    iv: bool = True
    simulate: bool = True
    robustness: bool = True


class BindingsConfig(Section):
    """Column names of every role the analysis needs."""

    binary_outcome: str = "y1_use"
    ordinal_outcome: str = "y2_breadth"
    treatment: str = "ai_washing"
    mediators: tuple[str, str] = ("knowledge_exclusion", "risk_exclusion")
    moderator: str = "social_capital"
    instruments: tuple[str, ...] = ("industry_mean_washing", "firm_age")
    controls: tuple[str, ...] = DEFAULT_CONTROLS
    head_controls: tuple[str, ...] = DEFAULT_HEAD_CONTROLS
    firm: str = "firm_id"
    region: str = "region"
    age: str = "age"
    income: str = "income"
    education: str = "education"
    prior_use: str = "prior_use"
    cluster: Optional[str] = None

    @model_validator(mode="after")
    def _check_roles(self) -> "BindingsConfig":
        extra = set(self.head_controls) - set(self.controls)
        if extra:
            raise ValueError(f"head_controls not listed in controls: {sorted(extra)}")
        clash = {self.treatment, *self.mediators, self.moderator} & set(self.controls)
        if clash:
            raise ValueError(f"Controls overlap treatment, mediators or moderator: {sorted(clash)}")
        return self

    def household_roles(self, columns: Any) -> dict[str, str]:
        """Role → column map for the household schema check.

        ``treatment`` and ``income`` are checked only when the file carries them.
        """
        roles = {
            "binary_outcome": self.binary_outcome,
            "ordinal_outcome": self.ordinal_outcome,
            "knowledge": self.mediators[0],
            "risk": self.mediators[1],
            "moderator": self.moderator,
            "age": self.age,
        }
        for role, column in (("treatment", self.treatment), ("income", self.income)):
            if column in columns:
                roles[role] = column
        return roles


class IndexConfig(Section):
    standardization: Standardization = Standardization.WITHIN_YEAR
    pooled_weights: bool = False


class BootstrapConfig(Section):
    reps: int = Field(500, ge=100)
    cluster: bool = False
    level: float = Field(0.95, gt=0.0, lt=1.0)


class SimulationConfig(Section):
    scenarios: tuple[Union[str, dict[str, Any]], ...] = ("S1", "S2", "S3", "S4", "TG")
    costs: dict[str, float] = Field(default_factory=dict)
    population_size: int = Field(10_000, gt=0)
    sensitivity_reps: int = Field(1000, ge=10)
    perturb_fraction: float = Field(0.2, ge=0.0, lt=1.0)

    @field_validator("scenarios")
    @classmethod
    def _check_scenarios(cls, value: tuple[Union[str, dict[str, Any]], ...]) -> tuple:
        for entry in value:
            _scenario(entry)
        return value

    @field_validator("costs")
    @classmethod
    def _check_costs(cls, value: dict[str, float]) -> dict[str, float]:
        try:
            CostModel(**value)
        except TypeError as exc:
            raise ValueError(f"Unknown cost setting: {exc}") from exc
        return value

    def scenario_specs(self) -> list[ScenarioSpec]:
        return [_scenario(entry) for entry in self.scenarios]

    def cost_model(self) -> CostModel:
        return CostModel(**self.costs)


def _scenario(entry: Union[str, dict[str, Any]]) -> ScenarioSpec:
    if isinstance(entry, str):
        return scenario_from_mapping({"preset": entry})
    try:
        return scenario_from_mapping(entry)
    except TypeError as exc:
        raise ValueError(f"Invalid scenario {entry!r}: {exc}") from exc


class RunConfig(Section):
    """Effective configuration of one invocation.

    With a ``[datagen]`` block the inputs are the bundle written to
    ``<out_dir>/bundle/``; the ``[inputs]`` table is then ignored.
    """

    seed: Optional[int] = Field(None, ge=0)
    out_dir: Path = DEFAULT_OUT_DIR
    threads: int = Field(1, ge=1)
    inputs: InputsConfig = InputsConfig()
    datagen: Optional[dict[str, Any]] = None
    stages: StagesConfig = StagesConfig()
    bindings: BindingsConfig = BindingsConfig()
    index: IndexConfig = IndexConfig()
    bootstrap: BootstrapConfig = BootstrapConfig()
    simulation: SimulationConfig = SimulationConfig()

    @field_validator("datagen")
    @classmethod
    def _check_datagen(cls, value: Optional[dict[str, Any]]) -> Optional[dict[str, Any]]:
        if value is not None:
            try:
                TruthConfig.from_mapping(value)
            except TypeError as exc:
                raise ValueError(f"Invalid datagen setting: {exc}") from exc
        return value

    def truth_config(self) -> TruthConfig:
        return TruthConfig.from_mapping(self.datagen or {})

    def resolved_inputs(self) -> InputsConfig:
        if self.datagen is None:
            return self.inputs
        paths = bundle_paths(self.out_dir / BUNDLE_DIR)
        return InputsConfig(
            lexicon=paths.lexicon,
            corpus_dir=paths.corpus_dir,
            firms_csv=paths.firms_csv,
            households_csv=paths.households_csv,
            usage_csv=paths.usage_csv,
            platforms_csv=paths.platforms_csv,
            iv_csv=paths.iv_csv,
            truth=paths.truth,
        )

    def require_seed(self, stages: list[str]) -> None:
        """Raises InvalidSpec when a stochastic stage would run without a seed."""
        needing = [s for s in stages if s in STOCHASTIC_STAGES]
        if needing and self.seed is None:
            raise InvalidSpec(f"A seed is required for stages {needing}; pass --seed or set seed")

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump; ``threads`` and ``out_dir`` do not count."""
        dump = self.model_dump(mode="json", exclude={"threads", "out_dir"})
        canonical = json.dumps(dump, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _resolve_inputs(raw: dict[str, Any], base: Path) -> None:
    inputs = raw.get("inputs")
    if not isinstance(inputs, dict):
        return
    for name, value in inputs.items():
        if isinstance(value, str) and not Path(value).is_absolute():
            inputs[name] = str(base / value)


def load_config(
    path: Optional[Path] = None,
    *,
    seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
    threads: Optional[int] = None,
    datagen_default: bool = False,
) -> RunConfig:
    """Read ``path`` (if any), apply CLI overrides and validate.

    Relative input paths are taken from the config file's directory.
    ``datagen_default`` adds an empty ``[datagen]`` block when none is given.

    Raises:
        OSError: unreadable file
        tomllib.TOMLDecodeError: malformed TOML
        pydantic.ValidationError: unknown keys or invalid values
    """
    raw: dict[str, Any] = {}
    if path is not None:
        with path.open("rb") as handle:
            raw = tomllib.load(handle)
        _resolve_inputs(raw, path.parent)
    overrides = {"seed": seed, "out_dir": out_dir, "threads": threads}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if datagen_default and raw.get("datagen") is None:
        raw["datagen"] = {}
    return RunConfig.model_validate(raw)


__all__ = [
    "BindingsConfig",
    "BootstrapConfig",
    "IndexConfig",
    "InputsConfig",
    "RunConfig",
    "STOCHASTIC_STAGES",
    "SimulationConfig",
    "StagesConfig",
    "load_config",
]
