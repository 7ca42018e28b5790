"""Two-stage least squares for a linear-probability outcome."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

from .exceptions import InsufficientData, InvalidSpec, NoIdentification, SingularDesign
from .glm import INTERCEPT, DesignMatrix, complete_cases, fit_ols
from .models import FitResult, ModelKind
from .reporting import format_table

logger = logging.getLogger(__name__)

MIN_F = 1e-6


@dataclass(frozen=True)
class IVSpec:
    """One endogenous regressor, its excluded instruments and exogenous controls.

    ``robust`` selects HC1 errors for the second stage; the first-stage F
    and the J statistic are always heteroskedasticity-robust.
    """

    outcome: str
    endogenous: str
    instruments: tuple[str, ...]
    controls: tuple[str, ...] = ()
    robust: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "instruments", tuple(self.instruments))
        object.__setattr__(self, "controls", tuple(self.controls))
        if not self.instruments:
            raise InvalidSpec("At least one instrument is required")
        clash = set(self.instruments) & ({self.outcome, self.endogenous} | set(self.controls))
        if clash:
            raise InvalidSpec(f"Instruments overlap outcome, regressor or controls: {sorted(clash)}")

    @property
    def columns(self) -> list[str]:
        return [self.outcome, self.endogenous, *self.instruments, *self.controls]


class HansenJ(NamedTuple):
    j: float
    df: int
    p: float


@dataclass(frozen=True, eq=False)
class IVResult:
    spec: IVSpec
    first_stage: FitResult
    second_stage: FitResult
    first_stage_f: float
    f_df: tuple[int, int]
    hansen: HansenJ
    ols_coef: float
    n_obs: int

    @property
    def coef(self) -> float:
        return self.second_stage.coefficients[self.spec.endogenous]

    @property
    def se(self) -> float:
        return self.second_stage.std_errors[self.spec.endogenous]

    @property
    def z(self) -> float:
        return self.second_stage.z_values[self.spec.endogenous]

    @property
    def p(self) -> float:
        return self.second_stage.p_values[self.spec.endogenous]

    @property
    def hansen_j(self) -> float:
        return self.hansen.j

    @property
    def hansen_df(self) -> int:
        return self.hansen.df

    @property
    def hansen_p(self) -> float:
        return self.hansen.p

    @property
    def first_stage_coefficients(self) -> dict[str, float]:
        return {z: self.first_stage.coefficients[z] for z in self.spec.instruments}


def chi2_pvalue(statistic: float, df: int) -> float:
    """Upper-tail χ² probability; NaN when ``df`` is zero."""
    if df <= 0:
        return float("nan")
    return float(stats.chi2.sf(statistic, df))


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(a, b, assume_a="sym")
    except linalg.LinAlgError:
        raise SingularDesign(["instrument set"]) from None


def hansen_j(y: np.ndarray, X: np.ndarray, Z: np.ndarray) -> HansenJ:
    """Two-step efficient GMM overidentification statistic.

    The weight matrix is the inverse of the heteroskedasticity-robust moment
    covariance evaluated at the 2SLS residuals. Exactly identified systems
    return J = 0 with an undefined p-value.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n = len(y)
    df = Z.shape[1] - X.shape[1]
    if df < 0:
        raise InvalidSpec("Fewer instruments than regressors")
    if df == 0:
        return HansenJ(0.0, 0, float("nan"))

    zx = Z.T @ X
    zy = Z.T @ y
    ztz = Z.T @ Z
    beta_1 = _solve(zx.T @ _solve(ztz, zx), zx.T @ _solve(ztz, zy))
    u_1 = y - X @ beta_1
    S = (Z * (u_1**2)[:, None]).T @ Z / n
    W = linalg.pinvh(S)
    beta_2 = _solve(zx.T @ W @ zx, zx.T @ W @ zy)
    g = Z.T @ (y - X @ beta_2) / n
    j = max(float(n * g @ W @ g), 0.0)
    return HansenJ(j, df, chi2_pvalue(j, df))


def _robust_wald_f(fit: FitResult, names: Sequence[str]) -> float:
    idx = [fit.index_of(c) for c in names]
    b = fit.params[idx]
    V = fit.covariance[np.ix_(idx, idx)]
    return float(b @ _solve(V, b)) / len(idx)


def fit_2sls(data: pd.DataFrame, spec: IVSpec) -> IVResult:
    """Project the endogenous regressor on the instruments, then regress.

    Second-stage residuals use the observed endogenous column, not its
    projection.

    Raises:
        InsufficientData: too few complete rows
        SingularDesign: instruments collinear with controls
        NoIdentification: the excluded instruments carry no signal (F < 1e-6)
    """
    frame = complete_cases(data, spec.columns)
    n = len(frame)
    k_total = 2 + len(spec.instruments) + len(spec.controls)
    if n <= k_total + 10:
        raise InsufficientData(f"2SLS needs more than {k_total + 10} complete rows, got {n}")

    y = frame[spec.outcome].to_numpy(dtype=float)
    Z = DesignMatrix.from_frame(frame, [*spec.instruments, *spec.controls])
    X = DesignMatrix.from_frame(frame, [spec.endogenous, *spec.controls])
    first = fit_ols(Z, frame[spec.endogenous], robust=True, outcome=spec.endogenous)
    f_stat = _robust_wald_f(first, spec.instruments)
    if not f_stat >= MIN_F:
        raise NoIdentification(f_stat)

    # Project every regressor; the exogenous columns project onto themselves
    coef_z, *_ = linalg.lstsq(Z.values, X.values)
    X_hat = Z.values @ coef_z
    bread = linalg.inv(X_hat.T @ X_hat)
    beta = bread @ (X_hat.T @ y)
    resid = y - X.values @ beta
    k = X.n_columns
    if spec.robust:
        meat = X_hat.T @ (X_hat * (resid**2)[:, None])
        covariance = n / (n - k) * bread @ meat @ bread
    else:
        covariance = math.fsum(resid**2) / (n - k) * bread

    se = np.sqrt(np.diag(covariance))
    tss = math.fsum((y - y.mean()) ** 2)
    second = FitResult(
        model_kind=ModelKind.OLS,
        columns=X.columns,
        coefficients={c: float(b) for c, b in zip(X.columns, beta)},
        std_errors={c: float(s) for c, s in zip(X.columns, se)},
        z_values={c: float(b / s) for c, b, s in zip(X.columns, beta, se)},
        covariance=covariance,
        log_likelihood=float("nan"),
        null_log_likelihood=float("nan"),
        pseudo_r2=1.0 - math.fsum(resid**2) / tss if tss > 0 else float("nan"),
        n_obs=n,
        converged=True,
        iterations=1,
        outcome=spec.outcome,
    )

    ols = fit_ols(X, y, robust=spec.robust, outcome=spec.outcome)
    j = hansen_j(y, X.values, Z.values)
    logger.info(
        "2SLS on %d rows: coef=%.4f F=%.2f J=%.3f", n, second.coefficients[spec.endogenous], f_stat, j.j
    )
    return IVResult(
        spec=spec,
        first_stage=first,
        second_stage=second,
        first_stage_f=f_stat,
        f_df=(len(spec.instruments), n - Z.n_columns),
        hansen=j,
        ols_coef=ols.coefficients[spec.endogenous],
        n_obs=n,
    )


def leave_one_out_mean(frame: pd.DataFrame, value: str, group: str) -> pd.Series:
    """Mean of ``value`` over the other rows of the same ``group``.

    Singleton groups get NaN.
    """
    grouped = frame.groupby(group, sort=False)[value]
    totals = grouped.transform("sum")
    counts = grouped.transform("count")
    others = counts - 1
    out = (totals - frame[value]) / others.where(others > 0)
    return out.rename(f"{value}_loo_mean")


def firm_instruments(
    index: pd.DataFrame, firms: pd.DataFrame, *, value: str = "ai_washing"
) -> pd.DataFrame:
    """Per firm-year leave-one-out industry mean index and firm age.

    ``index`` has ``firm_id,year,<value>``; ``firms`` has ``firm_id,industry,founded``.
    """
    meta = firms[["firm_id", "industry", "founded"]].drop_duplicates("firm_id")
    merged = index[["firm_id", "year", value]].merge(meta, on="firm_id", how="left")
    if merged["industry"].isna().any():
        missing = merged.loc[merged["industry"].isna(), "firm_id"].unique()
        raise InsufficientData(f"No industry for firms {sorted(missing)}")
    merged["_cell"] = merged["industry"].astype(str) + "/" + merged["year"].astype(str)
    merged["industry_mean_washing"] = leave_one_out_mean(merged, value, "_cell")
    merged["firm_age"] = merged["year"] - merged["founded"]
    return merged[["firm_id", "year", "industry_mean_washing", "firm_age"]]


def iv_frame(result: IVResult) -> pd.DataFrame:
    """Second stage, first stage and diagnostics as ``block,term,value,se,z,p`` rows."""
    spec = result.spec
    nan = float("nan")
    rows = [
        ("second_stage", spec.endogenous, result.coef, result.se, result.z, result.p),
        ("ols", spec.endogenous, result.ols_coef, nan, nan, nan),
    ]
    first = result.first_stage
    p_first = first.p_values
    for term in first.columns:
        if term == INTERCEPT:
            continue
        rows.append(
            ("first_stage", term, first.coefficients[term], first.std_errors[term], first.z_values[term], p_first[term])
        )
    f_p = float(stats.f.sf(result.first_stage_f, *result.f_df))
    rows += [
        ("diagnostics", "first_stage_f", result.first_stage_f, nan, nan, f_p),
        ("diagnostics", "hansen_j", result.hansen.j, nan, nan, result.hansen.p),
        ("diagnostics", "hansen_df", float(result.hansen.df), nan, nan, nan),
        ("diagnostics", "n_obs", float(result.n_obs), nan, nan, nan),
    ]
    return pd.DataFrame(rows, columns=["block", "term", "value", "se", "z", "p"])


def iv_text(result: IVResult) -> str:
    return format_table(
        iv_frame(result),
        title="Instrumental variables (2SLS, linear probability)",
        note="first-stage F and Hansen J use heteroskedasticity-robust weights",
    )


__all__ = [
    "HansenJ",
    "IVResult",
    "IVSpec",
    "chi2_pvalue",
    "firm_instruments",
    "fit_2sls",
    "hansen_j",
    "iv_frame",
    "iv_text",
    "leave_one_out_mean",
]
