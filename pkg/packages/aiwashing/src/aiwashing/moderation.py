"""Interaction moderation, split-sample comparisons and simple slopes."""

import dataclasses
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd
from scipy import linalg, stats

from .exceptions import (
    AIWashingError,
    GroupTooSmall,
    InsufficientData,
    InvalidSpec,
    NotAModerationFit,
)
from .glm import average_marginal_effect, complete_cases, design_for, fit_model
from .models import FitResult, Interaction, ModelKind, SplitKind
from .parallel import run_indexed
from .reporting import coefficient_cell, format_table

logger = logging.getLogger(__name__)

MIN_GROUP_MARGIN = 10


@dataclass(frozen=True)
class ModelSpec:
    """One regression: outcome on treatment plus controls."""

    outcome: str
    treatment: str
    controls: tuple[str, ...] = ()
    kind: ModelKind = ModelKind.BINARY_LOGIT
    cluster: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.treatment in self.controls:
            raise InvalidSpec(f"Treatment {self.treatment!r} is also listed as a control")

    @property
    def columns(self) -> list[str]:
        return [self.treatment, *self.controls]


@dataclass(frozen=True)
class ModerationSpec:
    treatment: str
    moderator: str
    outcome: str
    controls: tuple[str, ...] = ()
    center_inputs: bool = False
    kind: ModelKind = ModelKind.BINARY_LOGIT
    cluster: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "controls", tuple(c for c in self.controls))
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.treatment == self.moderator:
            raise InvalidSpec("Treatment and moderator must be different columns")
        if self.moderator in self.controls or self.treatment in self.controls:
            raise InvalidSpec("Treatment and moderator cannot also be controls")

    @property
    def product(self) -> str:
        return f"{self.treatment}_x_{self.moderator}"


def fit_interaction(data: pd.DataFrame, spec: ModerationSpec) -> FitResult:
    """Fit outcome on treatment, moderator, their product and controls.

    With ``center_inputs`` the product is formed from mean-centred inputs
    while the main-effect columns stay raw; the subtracted means are kept in
    ``FitResult.centering``. The product coefficient and the likelihood do
    not depend on centering.

    Raises:
        SingularDesign: the moderator is constant or the product is collinear
    """
    needed = [spec.outcome, spec.treatment, spec.moderator, *spec.controls]
    frame = complete_cases(data, needed + ([spec.cluster] if spec.cluster else []))
    centering = {spec.treatment: 0.0, spec.moderator: 0.0}
    if spec.center_inputs:
        centering = {
            spec.treatment: float(frame[spec.treatment].mean()),
            spec.moderator: float(frame[spec.moderator].mean()),
        }
    frame[spec.product] = (frame[spec.treatment] - centering[spec.treatment]) * (
        frame[spec.moderator] - centering[spec.moderator]
    )
    fit = fit_model(
        frame,
        spec.outcome,
        [spec.treatment, spec.moderator, spec.product, *spec.controls],
        kind=spec.kind,
        cluster=spec.cluster,
    )
    return dataclasses.replace(
        fit,
        interaction=Interaction(spec.treatment, spec.moderator, spec.product),
        centering=centering,
    )


@dataclass(frozen=True)
class SplitRule:
    """How a column divides the sample into a low and a high group.

    ``median`` and ``threshold`` send ties to the low group unless
    ``low_inclusive`` is off; ``binary`` puts 1 in the high group.
    ``invert`` swaps which side is called high.
    """

    kind: SplitKind = SplitKind.MEDIAN
    value: Optional[float] = None
    low_inclusive: bool = True
    invert: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SplitKind(self.kind))
        if self.kind is SplitKind.THRESHOLD and self.value is None:
            raise InvalidSpec("Threshold splits need a value")

    def cutoff(self, values: np.ndarray) -> Optional[float]:
        if self.kind is SplitKind.MEDIAN:
            return float(np.median(values))
        if self.kind is SplitKind.THRESHOLD:
            return float(self.value)
        return None

    def assign(self, values: Sequence[float]) -> np.ndarray:
        """Boolean mask of the high group; every row lands in exactly one group."""
        x = np.asarray(values, dtype=float)
        if self.kind is SplitKind.BINARY:
            if not np.isin(x, (0.0, 1.0)).all():
                raise InvalidSpec("Binary splits need a 0/1 column")
            high = x == 1.0
        else:
            cut = self.cutoff(x)
            high = x > cut if self.low_inclusive else x >= cut
        return ~high if self.invert else high

    def describe(self) -> str:
        if self.kind is SplitKind.BINARY:
            text = "high = 1"
        else:
            op = ">" if self.low_inclusive else ">="
            where = "median" if self.kind is SplitKind.MEDIAN else f"{self.value:g}"
            text = f"high {op} {where}"
        return f"{text} (inverted)" if self.invert else text


class WaldDifference(NamedTuple):
    diff: float
    se: float
    z: float
    p: float


def chow_z(coef_high: float, se_high: float, coef_low: float, se_low: float) -> WaldDifference:
    """Wald z for ``coef_high − coef_low`` from independent group fits."""
    diff = coef_high - coef_low
    se = math.sqrt(se_high**2 + se_low**2)
    z = diff / se
    return WaldDifference(diff, se, z, float(2.0 * stats.norm.sf(abs(z))))


@dataclass(frozen=True, eq=False)
class SplitComparison:
    """Treatment coefficient in each group and their difference (high − low)."""

    split_var: str
    rule: SplitRule
    treatment: str
    low: FitResult
    high: FitResult
    n_low: int
    n_high: int
    ame_low: float
    ame_high: float

    @property
    def wald(self) -> WaldDifference:
        t = self.treatment
        return chow_z(
            self.high.coefficients[t],
            self.high.std_errors[t],
            self.low.coefficients[t],
            self.low.std_errors[t],
        )

    @property
    def diff(self) -> float:
        return self.wald.diff

    @property
    def diff_se(self) -> float:
        return self.wald.se

    @property
    def diff_z(self) -> float:
        return self.wald.z

    @property
    def diff_p(self) -> float:
        return self.wald.p

    @property
    def attenuation(self) -> Optional[float]:
        """1 − AME_high / AME_low; None when the low-group AME is zero."""
        if self.ame_low == 0.0:
            return None
        return 1.0 - self.ame_high / self.ame_low


@dataclass(frozen=True)
class SplitFailure:
    split_var: str
    reason: str


def _has_variation(frame: pd.DataFrame, spec: ModelSpec) -> bool:
    return frame[spec.outcome].nunique() > 1


def _split_frames(
    data: pd.DataFrame, split_var: str, rule: SplitRule, spec: ModelSpec
) -> tuple[ModelSpec, pd.DataFrame, pd.DataFrame]:
    controls = tuple(c for c in spec.controls if c != split_var)
    group_spec = dataclasses.replace(spec, controls=controls)
    needed = [spec.outcome, *group_spec.columns, split_var]
    frame = complete_cases(data, needed + ([spec.cluster] if spec.cluster else []))
    high = rule.assign(frame[split_var].to_numpy())
    n_columns = len(group_spec.columns) + (0 if spec.kind is ModelKind.ORDERED_LOGIT else 1)
    groups = []
    for side, mask in (("low", ~high), ("high", high)):
        group = frame[mask].reset_index(drop=True)
        if len(group) <= n_columns + MIN_GROUP_MARGIN or not _has_variation(group, spec):
            raise GroupTooSmall(side, len(group))
        groups.append(group)
    return group_spec, groups[0], groups[1]


def _group_fit(group: pd.DataFrame, spec: ModelSpec) -> tuple[FitResult, float]:
    fit = fit_model(
        group, spec.outcome, spec.columns, kind=spec.kind, cluster=spec.cluster
    )
    ame = average_marginal_effect(fit, design_for(group, fit), spec.treatment, discrete=False)
    return fit, ame


def split_fit(
    data: pd.DataFrame, split_var: str, rule: SplitRule, model_spec: ModelSpec
) -> SplitComparison:
    """Fit ``model_spec`` separately in the low and high groups of ``split_var``.

    The split column is dropped from the controls. ``diff`` is always the
    high-group coefficient minus the low-group one.

    Raises:
        GroupTooSmall: a group has too few rows or a single outcome value
    """
    group_spec, low, high = _split_frames(data, split_var, rule, model_spec)
    low_fit, ame_low = _group_fit(low, group_spec)
    high_fit, ame_high = _group_fit(high, group_spec)
    logger.info(
        "Split on %s (%s): n_low=%d n_high=%d", split_var, rule.describe(), len(low), len(high)
    )
    return SplitComparison(
        split_var=split_var,
        rule=rule,
        treatment=model_spec.treatment,
        low=low_fit,
        high=high_fit,
        n_low=len(low),
        n_high=len(high),
        ame_low=ame_low,
        ame_high=ame_high,
    )


class ChowF(NamedTuple):
    f: float
    df1: int
    df2: int
    p: float


def _rss(frame: pd.DataFrame, outcome: str, columns: Sequence[str]) -> float:
    X = np.column_stack([np.ones(len(frame)), frame[list(columns)].to_numpy(dtype=float)])
    y = frame[outcome].to_numpy(dtype=float)
    beta, *_ = linalg.lstsq(X, y)
    resid = y - X @ beta
    return math.fsum(resid * resid)


def chow_f(
    data: pd.DataFrame, split_var: str, rule: SplitRule, model_spec: ModelSpec
) -> ChowF:
    """Classical Chow F for a least-squares version of ``model_spec``."""
    group_spec, low, high = _split_frames(data, split_var, rule, model_spec)
    pooled = pd.concat([low, high], ignore_index=True)
    k = len(group_spec.columns) + 1
    n = len(pooled)
    if n - 2 * k <= 0:
        raise InsufficientData("Chow F needs more rows than twice the coefficients")
    rss_groups = _rss(low, group_spec.outcome, group_spec.columns) + _rss(
        high, group_spec.outcome, group_spec.columns
    )
    rss_pooled = _rss(pooled, group_spec.outcome, group_spec.columns)
    f = ((rss_pooled - rss_groups) / k) / (rss_groups / (n - 2 * k))
    return ChowF(float(f), k, n - 2 * k, float(stats.f.sf(f, k, n - 2 * k)))


class SlopeRow(NamedTuple):
    level: float
    slope: float
    se: float
    z: float


def simple_slopes(fit: FitResult, moderator_levels: Sequence[float]) -> list[SlopeRow]:
    """Treatment slope on the linear-index scale at each moderator level.

    slope(L) = β_treatment + β_product · (L − c), where ``c`` is the
    moderator centering used when the product was formed.

    Raises:
        NotAModerationFit: the fit has no interaction term
    """
    if fit.interaction is None:
        raise NotAModerationFit()
    treatment, moderator, product = fit.interaction
    i = fit.index_of(treatment)
    j = fit.index_of(product)
    cov = fit.covariance
    b_t = fit.coefficients[treatment]
    b_3 = fit.coefficients[product]
    shift = fit.centering.get(moderator, 0.0)

    rows = []
    for level in moderator_levels:
        d = float(level) - shift
        slope = b_t + b_3 * d
        variance = cov[i, i] + 2.0 * d * cov[i, j] + d * d * cov[j, j]
        se = math.sqrt(max(variance, 0.0))
        rows.append(SlopeRow(float(level), slope, se, slope / se if se > 0 else float("nan")))
    return rows


def default_slope_levels(values: Sequence[float]) -> list[float]:
    """Mean − 1 SD, mean and mean + 1 SD, clamped to the observed range."""
    x = np.asarray(values, dtype=float)
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    lo, hi = float(x.min()), float(x.max())
    return [min(max(v, lo), hi) for v in (mean - sd, mean, mean + sd)]


def heterogeneity_battery(
    data: pd.DataFrame,
    dims: Sequence[tuple[str, SplitRule]],
    model_spec: ModelSpec,
    *,
    threads: Optional[int] = None,
) -> list[Union[SplitComparison, SplitFailure]]:
    """Run ``split_fit`` for every dimension; failures stay in their slot."""

    def run(index: int) -> Union[SplitComparison, SplitFailure]:
        split_var, rule = dims[index]
        try:
            return split_fit(data, split_var, rule, model_spec)
        except AIWashingError as exc:
            logger.warning("Heterogeneity split on %s failed: %s", split_var, exc)
            return SplitFailure(split_var, str(exc))

    return run_indexed(run, len(dims), threads)


# Report frames


def moderation_frame(fit: FitResult, comparison: Optional[SplitComparison] = None) -> pd.DataFrame:
    """Interaction model rows, then high/low group rows and their difference."""
    if fit.interaction is None:
        raise NotAModerationFit()
    p_values = fit.p_values
    rows = [
        (
            "interaction",
            term,
            fit.coefficients[term],
            fit.std_errors[term],
            fit.z_values[term],
            p_values[term],
            fit.n_obs,
        )
        for term in fit.interaction
    ]
    if comparison is not None:
        t = comparison.treatment
        for label, group, n in (
            ("high", comparison.high, comparison.n_high),
            ("low", comparison.low, comparison.n_low),
        ):
            rows.append(
                (label, t, group.coefficients[t], group.std_errors[t], group.z_values[t], group.p_values[t], n)
            )
        w = comparison.wald
        rows.append(("difference", t, w.diff, w.se, w.z, w.p, comparison.n_low + comparison.n_high))
    return pd.DataFrame(rows, columns=["model", "term", "coef", "se", "z", "p", "n_obs"])


def moderation_text(fit: FitResult, comparison: Optional[SplitComparison] = None) -> str:
    frame = moderation_frame(fit, comparison)
    cells = frame.assign(
        estimate=[coefficient_cell(c, z, p) for c, z, p in zip(frame.coef, frame.z, frame.p)]
    )[["model", "term", "estimate", "n_obs"]]
    return format_table(
        cells,
        title="Moderation by the moderator and split-sample comparison",
        note="difference = high − low, Wald z; z-values in parentheses",
    )


def heterogeneity_frame(results: Sequence[Union[SplitComparison, SplitFailure]]) -> pd.DataFrame:
    rows = []
    for result in results:
        if isinstance(result, SplitFailure):
            rows.append({"split_var": result.split_var, "status": "failed", "reason": result.reason})
            continue
        t = result.treatment
        w = result.wald
        rows.append(
            {
                "split_var": result.split_var,
                "rule": result.rule.describe(),
                "low_coef": result.low.coefficients[t],
                "low_z": result.low.z_values[t],
                "high_coef": result.high.coefficients[t],
                "high_z": result.high.z_values[t],
                "diff": w.diff,
                "diff_z": w.z,
                "diff_p": w.p,
                "n_low": result.n_low,
                "n_high": result.n_high,
                "ame_low": result.ame_low,
                "ame_high": result.ame_high,
                "attenuation": result.attenuation,
                "status": "ok",
                "reason": "",
            }
        )
    columns = [
        "split_var", "rule", "low_coef", "low_z", "high_coef", "high_z", "diff", "diff_z",
        "diff_p", "n_low", "n_high", "ame_low", "ame_high", "attenuation", "status", "reason",
    ]
    return pd.DataFrame(rows).reindex(columns=columns)


def slopes_frame(rows: Sequence[SlopeRow]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(SlopeRow._fields))


__all__ = [
    "ChowF",
    "ModelSpec",
    "ModerationSpec",
    "SlopeRow",
    "SplitComparison",
    "SplitFailure",
    "SplitRule",
    "WaldDifference",
    "chow_f",
    "chow_z",
    "default_slope_levels",
    "fit_interaction",
    "heterogeneity_battery",
    "heterogeneity_frame",
    "moderation_frame",
    "moderation_text",
    "simple_slopes",
    "slopes_frame",
    "split_fit",
]
