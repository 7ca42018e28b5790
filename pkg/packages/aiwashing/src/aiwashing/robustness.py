"""Baseline refits on alternative measures, outcomes and samples."""

import dataclasses
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from .exceptions import AIWashingError, InsufficientData
from .glm import complete_cases, fit_model
from .models import FitResult, ModelKind
from .moderation import ModelSpec
from .reporting import coefficient_cell, format_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """Treatment coefficient of one robustness refit, or why it failed."""

    check: str
    label: str
    term: str
    fit: Optional[FitResult] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.fit is not None

    @property
    def coef(self) -> float:
        return self.fit.coefficients[self.term] if self.fit else float("nan")

    @property
    def se(self) -> float:
        return self.fit.std_errors[self.term] if self.fit else float("nan")

    @property
    def z(self) -> float:
        return self.fit.z_values[self.term] if self.fit else float("nan")


def _refit(check: str, label: str, data: pd.DataFrame, spec: ModelSpec) -> RobustnessResult:
    try:
        fit = fit_model(data, spec.outcome, spec.columns, kind=spec.kind, cluster=spec.cluster)
    except AIWashingError as exc:
        logger.warning("Robustness check %s/%s failed: %s", check, label, exc)
        return RobustnessResult(check, label, spec.treatment, error=str(exc))
    return RobustnessResult(check, label, spec.treatment, fit)


def alternative_measures(
    data: pd.DataFrame, base_spec: ModelSpec, measures: Sequence[str]
) -> list[RobustnessResult]:
    """Refit the baseline with each alternative index column as the treatment."""
    return [
        _refit("alternative_measure", measure, data, dataclasses.replace(base_spec, treatment=measure))
        for measure in measures
    ]


def replace_outcome(
    data: pd.DataFrame,
    base_spec: ModelSpec,
    outcome: str,
    kind: ModelKind = ModelKind.ORDERED_LOGIT,
) -> RobustnessResult:
    spec = dataclasses.replace(base_spec, outcome=outcome, kind=kind)
    return _refit("replace_outcome", outcome, data, spec)


def trimmed_sample(
    data: pd.DataFrame,
    base_spec: ModelSpec,
    column: Optional[str] = None,
    lower: float = 0.01,
    upper: float = 0.99,
) -> RobustnessResult:
    """Drop rows whose ``column`` lies outside its [lower, upper] quantiles."""
    column = column or base_spec.treatment
    if not 0.0 <= lower < upper <= 1.0:
        raise InsufficientData(f"Invalid trimming quantiles ({lower}, {upper})")
    frame = complete_cases(data, [column])
    lo, hi = np.quantile(frame[column].to_numpy(dtype=float), [lower, upper])
    kept = frame[(frame[column] >= lo) & (frame[column] <= hi)]
    logger.info("Trimming %s to [%.4g, %.4g] keeps %d of %d rows", column, lo, hi, len(kept), len(frame))
    return _refit("trimmed", f"{column} [{lower:g}, {upper:g}]", kept, base_spec)


def platform_subsample(
    data: pd.DataFrame,
    base_spec: ModelSpec,
    firms: Iterable[str],
    column: str = "firm_id",
) -> RobustnessResult:
    firms = sorted(set(str(f) for f in firms))
    kept = data[data[column].astype(str).isin(firms)]
    return _refit("platform_subsample", "+".join(firms), kept, base_spec)


def stratified_fits(
    data: pd.DataFrame, base_spec: ModelSpec, by: str = "region"
) -> list[RobustnessResult]:
    """One baseline fit per stratum of ``by``, in sorted stratum order."""
    frame = complete_cases(data, [by])
    return [
        _refit("stratified", f"{by}={level}", group, base_spec)
        for level, group in frame.groupby(by, sort=True)
    ]


def largest_platforms(data: pd.DataFrame, count: int = 2, column: str = "firm_id") -> list[str]:
    """The ``count`` platforms with the most households (ties by id)."""
    sizes = data[column].astype(str).value_counts()
    ordered = sorted(sizes.items(), key=lambda kv: (-kv[1], kv[0]))
    return [firm for firm, _ in ordered[:count]]


def robustness_table(results: Sequence[RobustnessResult]) -> pd.DataFrame:
    rows = []
    for r in results:
        rows.append(
            {
                "check": r.check,
                "label": r.label,
                "term": r.term,
                "coef": r.coef,
                "se": r.se,
                "z": r.z,
                "p": r.fit.p_values[r.term] if r.fit else float("nan"),
                "n_obs": r.fit.n_obs if r.fit else 0,
                "status": "ok" if r.ok else "failed",
                "error": r.error,
            }
        )
    return pd.DataFrame(
        rows, columns=["check", "label", "term", "coef", "se", "z", "p", "n_obs", "status", "error"]
    )


def robustness_text(results: Sequence[RobustnessResult]) -> str:
    frame = robustness_table(results)
    cells = frame.assign(
        estimate=[
            coefficient_cell(c, z, p) if s == "ok" else "failed"
            for c, z, p, s in zip(frame.coef, frame.z, frame.p, frame.status)
        ]
    )[["check", "label", "estimate", "n_obs"]]
    return format_table(cells, title="Robustness checks")


__all__ = [
    "RobustnessResult",
    "alternative_measures",
    "largest_platforms",
    "platform_subsample",
    "replace_outcome",
    "robustness_table",
    "robustness_text",
    "stratified_fits",
    "trimmed_sample",
]
