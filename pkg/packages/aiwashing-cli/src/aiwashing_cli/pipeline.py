"""Stage orchestration.

Stages never share in-memory state: each one reads the input files and the
declared upstream outputs under the output directory, and writes its own
files there. Any stage can therefore be rerun on its own.
"""

import hashlib
import json
import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from aiwashing import (
    MediationSpec,
    ModelKind,
    ModelSpec,
    ModerationSpec,
    SplitKind,
    SplitRule,
    StageStatus,
    attach_index,
    bootstrap_mediation,
    build_index,
    cost_benefit,
    default_lexicon,
    fit_2sls,
    fit_interaction,
    fit_mediation,
    fit_sim_model,
    generate,
    heterogeneity_battery,
    load_lexicon,
    oracle_report,
    read_corpus_dir,
    read_truth,
    sensitivity,
    simple_slopes,
    simulate,
    split_fit,
    structural_self_test,
    trend_report,
    write_bundle,
)
from aiwashing.capability import weights_frame
from aiwashing.exceptions import InsufficientData, InvalidSpec, ValidationFailed
from aiwashing.glm import (
    average_marginal_effect,
    coefficient_frame,
    complete_cases,
    design_for,
    nested_specifications,
    probability_moves,
    regression_table_text,
)
from aiwashing.iv import IVSpec, firm_instruments, iv_frame, iv_text
from aiwashing.mediation import decomposition_report
from aiwashing.moderation import (
    default_slope_levels,
    heterogeneity_frame,
    moderation_frame,
    moderation_text,
    slopes_frame,
)
from aiwashing.parsers.table_parser import parse_capabilities
from aiwashing.policy import simulation_frame, simulation_text
from aiwashing.robustness import (
    alternative_measures,
    largest_platforms,
    platform_subsample,
    replace_outcome,
    robustness_table,
    robustness_text,
    stratified_fits,
    trimmed_sample,
)
from aiwashing.utils import file_digest

from .config import BUNDLE_DIR, InputsConfig, RunConfig
from .validation import validate_inputs

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"
MANIFEST = "manifest.json"
REPORT_FILES = (
    "index.csv",
    "trend.csv",
    "baseline.csv",
    "mediation.csv",
    "moderation.csv",
    "iv.csv",
    "simulation.csv",
)
ALTERNATIVE_MEASURES = ("ai_washing_raw", "ai_washing_equal_weights", "ai_washing_pooled")
LOW_EDUCATION_YEARS = 9
EXIT_VALIDATION = 2
EXIT_STAGE_FAILED = 3


def write_csv(frame: pd.DataFrame, path: Path, config_hash: str) -> Path:
    """Write ``frame`` under a ``# config_hash=`` line with fixed float formatting."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# config_hash={config_hash}\n")
        frame.to_csv(handle, index=False, float_format="%.10g", na_rep=UNDEFINED, lineterminator="\n")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", na_values=[UNDEFINED], encoding="utf-8")


def _directory_digest(directory: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(p for p in directory.iterdir() if p.is_file()):
        digest.update(path.name.encode("utf-8"))
        digest.update(file_digest(path).encode("ascii"))
    return digest.hexdigest()


@dataclass
class StageContext:
    """What a stage may touch: the config, resolved inputs and the output directory."""

    config: RunConfig
    inputs: InputsConfig
    config_hash: str
    outputs: list[str] = field(default_factory=list)

    @property
    def out_dir(self) -> Path:
        return self.config.out_dir

    @property
    def threads(self) -> int:
        return self.config.threads

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write(self, frame: pd.DataFrame, name: str) -> None:
        write_csv(frame, self.path(name), self.config_hash)
        self.record(name)

    def write_text(self, text: str, name: str) -> None:
        self.path(name).write_text(text, encoding="utf-8")
        self.record(name)

    def read(self, name: str) -> pd.DataFrame:
        return read_csv(self.path(name))

    def households(self) -> pd.DataFrame:
        """The analysis table: indexed households when the index stage is on."""
        name = "households_indexed.csv" if self.config.stages.index else "households_clean.csv"
        return self.read(name)

    def record(self, name: str) -> None:
        if name not in self.outputs:
            self.outputs.append(name)


# Stages


def run_generate(ctx: StageContext) -> None:
    bundle = generate(ctx.config.truth_config(), ctx.config.seed)
    paths = write_bundle(bundle, ctx.path(BUNDLE_DIR))
    check = structural_self_test(bundle)
    logger.info(
        "Self-test %s: estimate %.4f, truth %.4f, covered=%s",
        check.parameter, check.estimate, check.truth, check.covered,
    )
    for path in (paths.firms_csv, paths.households_csv, paths.usage_csv, paths.platforms_csv,
                 paths.iv_csv, paths.lexicon, paths.truth):
        ctx.record(str(path.relative_to(ctx.out_dir)))


def run_validate(ctx: StageContext) -> None:
    try:
        result = validate_inputs(
            ctx.inputs, ctx.config.bindings, need_treatment=not ctx.config.stages.index
        )
    except ValidationFailed as exc:
        if exc.report is not None:
            ctx.write(exc.report.violations_frame(), "validation.csv")
        raise
    ctx.write(result.violations_frame(), "validation.csv")
    ctx.write(result.households, "households_clean.csv")


def _survey_year(households: pd.DataFrame, years: Sequence[int]) -> Optional[int]:
    return None if "year" in households.columns else max(years)


def run_index(ctx: StageContext) -> None:
    inputs = ctx.inputs
    if inputs.corpus_dir is None or inputs.firms_csv is None:
        raise FileNotFoundError("The index stage needs [inputs].corpus_dir and firms_csv")
    lexicon = load_lexicon(inputs.lexicon) if inputs.lexicon else default_lexicon()
    firms = pd.read_csv(inputs.firms_csv)
    records, _ = parse_capabilities(firms)
    panel = build_index(
        read_corpus_dir(inputs.corpus_dir),
        records,
        lexicon,
        standardization=ctx.config.index.standardization,
        pooled_weights=ctx.config.index.pooled_weights,
    )
    ctx.write(panel.to_frame(alternatives=True), "index.csv")
    ctx.write(panel.talk.to_frame(), "talk.csv")
    ctx.write(panel.walk.to_frame(), "walk.csv")
    ctx.write(weights_frame(panel.weights), "weights.csv")

    years = panel.washing.years()
    if inputs.usage_csv is not None and inputs.platforms_csv is not None:
        usage = pd.read_csv(inputs.usage_csv)
        platforms = pd.read_csv(inputs.platforms_csv)
        survey = {e.firm_id: e.value for e in panel.washing.for_year(max(years))}
        cross_section = [
            (survey[str(f)], float(b))
            for f, b in zip(platforms["firm_id"], platforms["product_breadth"])
            if str(f) in survey
        ]
        shares = None
        if "platform_share" in firms.columns:
            shares = {
                (str(f), int(y)): float(s)
                for f, y, s in zip(firms["firm_id"], firms["year"], firms["platform_share"])
            }
        try:
            trend = trend_report(
                panel.washing,
                dict(zip(usage["year"].astype(int), usage["usage_rate"].astype(float))),
                cross_section,
                weights=shares,
            )
        except InsufficientData as exc:
            logger.warning("Trend report skipped: %s", exc)
        else:
            ctx.write(trend.to_frame(), "trend.csv")
            ctx.write(trend.series_frame(), "trend_series.csv")
    else:
        logger.warning("No usage or platform file; trend.csv not written")

    households = ctx.read("households_clean.csv")
    year = _survey_year(households, years)
    indexed = attach_index(households, panel.washing, year=year, column=ctx.config.bindings.treatment)
    for series in (panel.washing_raw, panel.washing_equal_weights, panel.washing_pooled):
        indexed = attach_index(indexed, series, year=year, column=series.name)
    ctx.write(indexed, "households_indexed.csv")


def run_fit(ctx: StageContext) -> None:
    b = ctx.config.bindings
    data = ctx.households()
    blocks = [(), b.head_controls, b.controls]
    fits = nested_specifications(
        data, b.binary_outcome, b.treatment, blocks, kind=ModelKind.BINARY_LOGIT, cluster=b.cluster
    )
    fits += nested_specifications(
        data, b.ordinal_outcome, b.treatment, blocks, kind=ModelKind.ORDERED_LOGIT, cluster=b.cluster
    )
    frames = [
        coefficient_frame(fit).assign(
            model=f"({i + 1})", outcome=fit.outcome, kind=str(fit.model_kind),
            n_obs=fit.n_obs, pseudo_r2=fit.pseudo_r2,
        )
        for i, fit in enumerate(fits)
    ]
    baseline = pd.concat(frames, ignore_index=True)
    columns = ["model", "outcome", "kind", "term", "coef", "se", "z", "p", "n_obs", "pseudo_r2"]
    ctx.write(baseline[columns], "baseline.csv")
    ctx.write_text(
        regression_table_text(fits, shown=[b.treatment], title="Baseline regressions"),
        "baseline.txt",
    )

    rows = []
    logit, ologit = fits[2], fits[5]
    X = design_for(data, logit)
    rows.append(("(3)", logit.outcome, "ame", None, average_marginal_effect(logit, X, b.treatment)))
    moves = probability_moves(logit, X, b.treatment)
    for statistic in ("base", "shifted", "change", "relative_change", "at_min", "at_max", "step"):
        rows.append(("(3)", logit.outcome, statistic, None, getattr(moves, statistic)))
    X = design_for(data, ologit)
    for category in range(len(ologit.thresholds) + 1):
        value = average_marginal_effect(ologit, X, b.treatment, category=category)
        rows.append(("(6)", ologit.outcome, "ame", category, value))
    frame = pd.DataFrame(rows, columns=["model", "outcome", "statistic", "category", "value"])
    ctx.write(frame.astype({"category": "Int64"}), "ame.csv")


def _mediation_spec(ctx: StageContext) -> MediationSpec:
    b = ctx.config.bindings
    return MediationSpec(b.treatment, b.mediators, b.binary_outcome, b.controls)


def run_mediate(ctx: StageContext) -> None:
    report = decomposition_report(fit_mediation(ctx.households(), _mediation_spec(ctx)))
    ctx.write(report.to_frame(), "mediation.csv")
    ctx.write_text(report.text(), "mediation.txt")


def run_bootstrap(ctx: StageContext) -> None:
    settings = ctx.config.bootstrap
    result = bootstrap_mediation(
        ctx.households(),
        _mediation_spec(ctx),
        replicates=settings.reps,
        seed=ctx.config.seed,
        cluster=ctx.config.bindings.firm if settings.cluster else None,
        level=settings.level,
        threads=ctx.threads,
    )
    if result.status != "ok":
        logger.warning("Bootstrap finished with %d failed replicates", result.failures)
    report = decomposition_report(result.point, result)
    ctx.write(report.to_frame(), "mediation.csv")
    ctx.write_text(report.text(), "mediation.txt")


def _heterogeneity_dims(ctx: StageContext, columns: pd.Index) -> list[tuple[str, SplitRule]]:
    b = ctx.config.bindings
    dims = [
        (b.education, SplitRule(SplitKind.THRESHOLD, LOW_EDUCATION_YEARS)),
        (b.age, SplitRule(SplitKind.THRESHOLD, 60, low_inclusive=False, invert=True)),
        (b.prior_use, SplitRule(SplitKind.BINARY)),
    ]
    return [(column, rule) for column, rule in dims if column in columns]


def run_moderate(ctx: StageContext) -> None:
    b = ctx.config.bindings
    data = ctx.households()
    spec = ModerationSpec(
        b.treatment, b.moderator, b.binary_outcome, b.controls, center_inputs=True, cluster=b.cluster
    )
    fit = fit_interaction(data, spec)
    model_spec = ModelSpec(b.binary_outcome, b.treatment, b.controls, cluster=b.cluster)
    comparison = split_fit(data, b.moderator, SplitRule(SplitKind.MEDIAN), model_spec)
    ctx.write(moderation_frame(fit, comparison), "moderation.csv")
    ctx.write_text(moderation_text(fit, comparison), "moderation.txt")

    levels = default_slope_levels(complete_cases(data, [b.moderator])[b.moderator])
    ctx.write(slopes_frame(simple_slopes(fit, levels)), "slopes.csv")

    results = heterogeneity_battery(
        data, _heterogeneity_dims(ctx, data.columns), model_spec, threads=ctx.threads
    )
    ctx.write(heterogeneity_frame(results), "heterogeneity.csv")


def run_iv(ctx: StageContext) -> None:
    b = ctx.config.bindings
    if ctx.inputs.iv_csv is not None:
        data = pd.read_csv(ctx.inputs.iv_csv)
        controls = tuple(c for c in b.controls if c in data.columns)
    else:
        if ctx.inputs.firms_csv is None:
            raise FileNotFoundError("The iv stage needs [inputs].iv_csv or firms_csv")
        index = ctx.read("index.csv")
        instruments = firm_instruments(index, pd.read_csv(ctx.inputs.firms_csv))
        households = ctx.households()
        if "year" not in households.columns:
            households = households.assign(year=int(index["year"].max()))
        data = households.drop(columns=list(b.instruments), errors="ignore").merge(
            instruments, left_on=[b.firm, "year"], right_on=["firm_id", "year"], how="left"
        )
        controls = b.controls
    result = fit_2sls(data, IVSpec(b.binary_outcome, b.treatment, b.instruments, controls, robust=True))
    ctx.write(iv_frame(result), "iv.csv")
    ctx.write_text(iv_text(result), "iv.txt")


def _with_subgroups(population: pd.DataFrame, ctx: StageContext) -> tuple[pd.DataFrame, list[str]]:
    b = ctx.config.bindings
    groups = []
    out = population.copy()
    if b.education in out.columns:
        out["education_group"] = np.where(out[b.education] <= LOW_EDUCATION_YEARS, "low", "high")
        groups.append("education_group")
    sc = out[b.moderator].to_numpy(dtype=float)
    out["social_capital_group"] = np.where(sc > np.median(sc), "high", "low")
    groups.append("social_capital_group")
    return out, groups


def run_simulate(ctx: StageContext) -> None:
    b = ctx.config.bindings
    settings = ctx.config.simulation
    data = ctx.households()
    model = fit_sim_model(
        data,
        outcome=b.binary_outcome,
        treatment=b.treatment,
        mediators=b.mediators,
        moderator=b.moderator,
        controls=b.controls,
    )
    population, groups = _with_subgroups(complete_cases(data, model.required_columns), ctx)
    scenarios = settings.scenario_specs()
    costs = settings.cost_model()
    outcomes = [
        cost_benefit(
            simulate(population, s, model, subgroups=groups), s, costs, settings.population_size
        )
        for s in scenarios
    ]
    ctx.write(simulation_frame(outcomes), "simulation.csv")
    ctx.write_text(simulation_text(outcomes), "simulation.txt")

    report = sensitivity(
        population,
        scenarios,
        model,
        perturb_fraction=settings.perturb_fraction,
        reps=settings.sensitivity_reps,
        seed=ctx.config.seed,
        threads=ctx.threads,
    )
    ctx.write(report.to_frame(), "sensitivity.csv")


def run_robustness(ctx: StageContext) -> None:
    b = ctx.config.bindings
    data = ctx.households()
    base = ModelSpec(b.binary_outcome, b.treatment, b.controls, cluster=b.cluster)
    results = alternative_measures(data, base, [m for m in ALTERNATIVE_MEASURES if m in data.columns])
    results.append(replace_outcome(data, base, b.ordinal_outcome))
    results.append(trimmed_sample(data, base))
    if b.firm in data.columns:
        firms = largest_platforms(data, column=b.firm)
        results.append(platform_subsample(data, base, firms, column=b.firm))
    if b.region in data.columns:
        results += stratified_fits(data, base, by=b.region)
    ctx.write(robustness_table(results), "robustness.csv")
    ctx.write_text(robustness_text(results), "robustness.txt")


def collect_estimates(ctx: StageContext) -> dict[str, tuple[float, float]]:
    """``name → (estimate, se)`` pairs read back from the report files."""
    b = ctx.config.bindings
    estimates: dict[str, tuple[float, float]] = {}

    if ctx.path("baseline.csv").exists():
        frame = ctx.read("baseline.csv")
        rows = frame[frame["term"] == b.treatment].set_index("model")
        for model, name in (("(3)", "baseline.ai_washing"), ("(6)", "ordered.ai_washing")):
            if model in rows.index:
                estimates[name] = (rows.at[model, "coef"], rows.at[model, "se"])

    if ctx.path("mediation.csv").exists():
        frame = ctx.read("mediation.csv")
        for row in frame[frame["panel"] == "A"].itertuples(index=False):
            estimates[f"mediation.{row.path}"] = (row.coef, row.se)
        for row in frame[frame["panel"] == "B"].itertuples(index=False):
            if row.path in ("indirect_1", "indirect_2"):
                estimates[f"mediation.{row.path}"] = (row.indirect, row.boot_se)

    if ctx.path("moderation.csv").exists():
        frame = ctx.read("moderation.csv")
        product = f"{b.treatment}_x_{b.moderator}"
        row = frame[(frame["model"] == "interaction") & (frame["term"] == product)]
        if len(row):
            estimates["moderation.interaction"] = (row["coef"].iat[0], row["se"].iat[0])

    if ctx.path("heterogeneity.csv").exists():
        frame = ctx.read("heterogeneity.csv")
        names = {b.education: "education", b.age: "age", b.prior_use: "experience"}
        for row in frame[frame["status"] == "ok"].itertuples(index=False):
            if row.split_var in names:
                estimates[f"heterogeneity.{names[row.split_var]}"] = (row.diff, abs(row.diff / row.diff_z))

    if ctx.path("iv.csv").exists():
        frame = ctx.read("iv.csv")
        for row in frame.itertuples(index=False):
            if row.block == "second_stage":
                estimates["iv.effect"] = (row.value, row.se)
            elif row.block == "first_stage" and row.term in b.instruments:
                estimates[f"iv.first_stage.{row.term}"] = (row.value, row.se)
    return {k: (float(v[0]), float(v[1])) for k, v in estimates.items()}


def run_oracle(ctx: StageContext) -> None:
    truth = read_truth(ctx.inputs.truth)
    report = oracle_report(truth, collect_estimates(ctx))
    ctx.write(report.frame, "oracle.csv")
    logger.info("Oracle: %d checked, coverage %.3f", report.checked, report.coverage)


# Orchestration


@dataclass(frozen=True)
class Stage:
    name: str
    run: Callable[[StageContext], None]
    requires: Callable[[RunConfig], tuple[str, ...]]
    enabled: Callable[[RunConfig], bool]


def _analysis(config: RunConfig) -> tuple[str, ...]:
    return ("validate", "index")


STAGES: tuple[Stage, ...] = (
    Stage("generate", run_generate, lambda c: (), lambda c: c.datagen is not None),
    Stage("validate", run_validate, lambda c: ("generate",), lambda c: True),
    Stage("index", run_index, lambda c: ("validate",), lambda c: c.stages.index),
    Stage("fit", run_fit, _analysis, lambda c: c.stages.fit),
    Stage("mediate", run_mediate, _analysis, lambda c: c.stages.mediate),
    Stage("bootstrap", run_bootstrap, lambda c: ("mediate",), lambda c: c.stages.mediate and c.stages.bootstrap),
    Stage("moderate", run_moderate, _analysis, lambda c: c.stages.moderate),
    Stage(
        "iv",
        run_iv,
        lambda c: ("generate",) if c.resolved_inputs().iv_csv else ("validate", "index"),
        lambda c: c.stages.iv,
    ),
    Stage("simulate", run_simulate, _analysis, lambda c: c.stages.simulate),
    Stage("robustness", run_robustness, _analysis, lambda c: c.stages.robustness),
    Stage(
        "oracle",
        run_oracle,
        lambda c: ("generate",),
        lambda c: c.resolved_inputs().truth is not None,
    ),
)
STAGE_NAMES = tuple(s.name for s in STAGES)


@dataclass
class StageRecord:
    name: str
    status: StageStatus
    error: str = ""
    seconds: float = 0.0
    validation_failed: bool = False


@dataclass
class RunManifest:
    """What ran, on which inputs, producing which files.

    Written even when a stage fails; ``seconds`` and ``wall_time`` are the
    only fields that vary between identical runs.
    """

    version: str
    config_hash: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    stages: list[StageRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def failed(self) -> list[StageRecord]:
        return [s for s in self.stages if s.status is StageStatus.FAILED]

    @property
    def exit_code(self) -> int:
        if any(s.validation_failed for s in self.failed):
            return EXIT_VALIDATION
        return EXIT_STAGE_FAILED if self.failed else 0

    def status_of(self, name: str) -> Optional[StageStatus]:
        return next((s.status for s in self.stages if s.name == name), None)

    def to_dict(self) -> dict[str, object]:
        data = asdict(self)
        data["stages"] = [
            {"name": s.name, "status": str(s.status), "error": s.error, "seconds": round(s.seconds, 3)}
            for s in self.stages
        ]
        data["wall_time"] = round(self.wall_time, 3)
        return data

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _version() -> str:
    try:
        return metadata.version("aiwashing-cli")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _input_digests(inputs: InputsConfig) -> dict[str, str]:
    digests = {}
    for name, path in inputs.files().items():
        if path.is_dir():
            digests[name] = _directory_digest(path)
        elif path.is_file():
            digests[name] = file_digest(path)
    return digests


def run_pipeline(config: RunConfig, stages: Optional[Sequence[str]] = None) -> RunManifest:
    """Run ``stages`` (default: every enabled stage) and write ``manifest.json``.

    With an explicit stage list the toggles are ignored and upstream
    outputs are expected on disk already. A failed stage marks every stage
    that requires it as skipped; independent stages still run.

    Raises:
        InvalidSpec: a stochastic stage would run without a seed, or an
            unknown stage name was given
    """
    started = time.perf_counter()
    if stages is None:
        selected = [s for s in STAGES if s.enabled(config)]
    else:
        unknown = set(stages) - set(STAGE_NAMES)
        if unknown:
            raise InvalidSpec(f"Unknown stages: {sorted(unknown)}")
        selected = [s for s in STAGES if s.name in stages]
    config.require_seed([s.name for s in selected])
    chosen = {s.name for s in selected}

    config.out_dir.mkdir(parents=True, exist_ok=True)
    ctx = StageContext(config, config.resolved_inputs(), config.config_hash())
    manifest = RunManifest(version=_version(), config_hash=ctx.config_hash)
    blocked: set[str] = set()

    for stage in STAGES:
        if stage.name not in chosen:
            if stages is None:
                manifest.stages.append(StageRecord(stage.name, StageStatus.SKIPPED, "disabled"))
            continue
        upstream = [name for name in stage.requires(config) if name in blocked]
        if upstream:
            blocked.add(stage.name)
            manifest.stages.append(
                StageRecord(stage.name, StageStatus.SKIPPED, f"upstream {', '.join(upstream)} failed")
            )
            continue
        logger.info("Running stage %s", stage.name)
        tick = time.perf_counter()
        try:
            stage.run(ctx)
        except Exception as exc:
            blocked.add(stage.name)
            logger.error("Stage %s failed: %s", stage.name, exc)
            logger.debug("Stage %s traceback", stage.name, exc_info=True)
            manifest.stages.append(
                StageRecord(
                    stage.name,
                    StageStatus.FAILED,
                    f"{type(exc).__name__}: {exc}",
                    time.perf_counter() - tick,
                    validation_failed=stage.name == "validate",
                )
            )
            continue
        manifest.stages.append(StageRecord(stage.name, StageStatus.OK, "", time.perf_counter() - tick))

    manifest.inputs = _input_digests(ctx.inputs)
    manifest.outputs = {
        name: file_digest(ctx.path(name)) for name in sorted(ctx.outputs) if ctx.path(name).exists()
    }
    manifest.wall_time = time.perf_counter() - started
    manifest.write(ctx.path(MANIFEST))
    return manifest


__all__ = [
    "EXIT_STAGE_FAILED",
    "EXIT_VALIDATION",
    "MANIFEST",
    "REPORT_FILES",
    "RunManifest",
    "STAGES",
    "STAGE_NAMES",
    "Stage",
    "StageContext",
    "StageRecord",
    "collect_estimates",
    "read_csv",
    "run_pipeline",
    "write_csv",
]
