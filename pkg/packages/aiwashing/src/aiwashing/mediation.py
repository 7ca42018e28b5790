"""Two-mediator path model with product-of-coefficients indirect effects."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy import linalg, stats

from .exceptions import AIWashingError, BootstrapCollapse, InsufficientData, InvalidSpec
from .glm import complete_cases, fit_model
from .models import FitResult, ModelKind, OutcomeLink
from .parallel import run_indexed
from .reporting import format_table
from .utils import replicate_rng

logger = logging.getLogger(__name__)

DEFAULT_REPLICATES = 5000
MIN_REPLICATES = 100
FAILURE_WARNING_RATE = 0.01
UNDEFINED_TOLERANCE = 1e-12

QUANTITIES = (
    "a1",
    "a2",
    "b1",
    "b2",
    "c_prime",
    "indirect_1",
    "indirect_2",
    "total_indirect",
    "total_effect",
)


@dataclass(frozen=True)
class MediationSpec:
    """Columns of the treatment → (M1, M2) → outcome system.

    The mediators are fit by least squares; the outcome equation uses
    ``outcome_link``. All three equations share ``controls``.
    """

    treatment: str
    mediators: tuple[str, str]
    outcome: str
    controls: tuple[str, ...] = ()
    outcome_link: OutcomeLink = OutcomeLink.LOGIT

    def __post_init__(self) -> None:
        object.__setattr__(self, "mediators", tuple(self.mediators))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "outcome_link", OutcomeLink(self.outcome_link))
        if len(self.mediators) != 2:
            raise InvalidSpec(f"Exactly two mediators are required, got {len(self.mediators)}")
        if self.mediators[0] == self.mediators[1]:
            raise InvalidSpec("The two mediators must differ")
        if self.treatment in self.mediators:
            raise InvalidSpec(f"Treatment {self.treatment!r} cannot also be a mediator")
        overlap = set(self.mediators) & set(self.controls)
        if overlap:
            raise InvalidSpec(f"Mediators also listed as controls: {sorted(overlap)}")
        if self.treatment in self.controls or self.outcome in self.controls:
            raise InvalidSpec("Treatment and outcome cannot be controls")

    @property
    def columns(self) -> list[str]:
        return [self.outcome, self.treatment, *self.mediators, *self.controls]


@dataclass(frozen=True)
class PathEstimate:
    coef: float
    se: float

    @property
    def z(self) -> float:
        return self.coef / self.se

    @property
    def p(self) -> float:
        return float(2.0 * stats.norm.sf(abs(self.z)))

    @classmethod
    def from_fit(cls, fit: FitResult, column: str) -> "PathEstimate":
        return cls(fit.coefficients[column], fit.std_errors[column])


@dataclass(frozen=True)
class MediationDecomposition:
    """Path estimates and the effects assembled from them.

    ``total_indirect`` and ``total_effect`` are sums of the stored products,
    so both identities hold exactly.
    """

    a1: PathEstimate
    a2: PathEstimate
    b1: PathEstimate
    b2: PathEstimate
    c_prime: PathEstimate
    n_obs: int
    outcome_link: OutcomeLink = OutcomeLink.LOGIT

    @property
    def indirect_1(self) -> float:
        return self.a1.coef * self.b1.coef

    @property
    def indirect_2(self) -> float:
        return self.a2.coef * self.b2.coef

    @property
    def total_indirect(self) -> float:
        return self.indirect_1 + self.indirect_2

    @property
    def total_effect(self) -> float:
        return self.c_prime.coef + self.total_indirect

    def proportion(self, value: float) -> Optional[float]:
        """``value`` over the total effect; None when the total is zero."""
        if abs(self.total_effect) <= UNDEFINED_TOLERANCE:
            return None
        return value / self.total_effect

    def share_of_indirect(self, value: float) -> Optional[float]:
        if abs(self.total_indirect) <= UNDEFINED_TOLERANCE:
            return None
        return value / self.total_indirect

    def quantities(self) -> dict[str, float]:
        return {
            "a1": self.a1.coef,
            "a2": self.a2.coef,
            "b1": self.b1.coef,
            "b2": self.b2.coef,
            "c_prime": self.c_prime.coef,
            "indirect_1": self.indirect_1,
            "indirect_2": self.indirect_2,
            "total_indirect": self.total_indirect,
            "total_effect": self.total_effect,
        }


def _check_size(frame: pd.DataFrame, spec: MediationSpec) -> None:
    n_columns = 4 + len(spec.controls)
    if len(frame) <= n_columns + 10:
        raise InsufficientData(
            f"Mediation needs more than {n_columns + 10} complete rows, got {len(frame)}"
        )


def _fit_system(frame: pd.DataFrame, spec: MediationSpec) -> MediationDecomposition:
    m1, m2 = spec.mediators
    path_columns = [spec.treatment, *spec.controls]
    eq_m1 = fit_model(frame, m1, path_columns, kind=ModelKind.OLS)
    eq_m2 = fit_model(frame, m2, path_columns, kind=ModelKind.OLS)
    outcome_kind = (
        ModelKind.BINARY_LOGIT if spec.outcome_link is OutcomeLink.LOGIT else ModelKind.OLS
    )
    eq_y = fit_model(
        frame, spec.outcome, [spec.treatment, m1, m2, *spec.controls], kind=outcome_kind
    )
    return MediationDecomposition(
        a1=PathEstimate.from_fit(eq_m1, spec.treatment),
        a2=PathEstimate.from_fit(eq_m2, spec.treatment),
        b1=PathEstimate.from_fit(eq_y, m1),
        b2=PathEstimate.from_fit(eq_y, m2),
        c_prime=PathEstimate.from_fit(eq_y, spec.treatment),
        n_obs=len(frame),
        outcome_link=spec.outcome_link,
    )


def fit_mediation(data: pd.DataFrame, spec: MediationSpec) -> MediationDecomposition:
    """Fit both mediator equations and the outcome equation on complete cases.

    Raises:
        InsufficientData: too few complete rows
        SingularDesign: collinear design in any equation
    """
    frame = complete_cases(data, spec.columns)
    _check_size(frame, spec)
    return _fit_system(frame, spec)


@dataclass(frozen=True)
class BootstrapCI:
    quantity: str
    point: float
    lower: float
    upper: float
    se: float
    level: float = 0.95


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Percentile intervals of every decomposition quantity.

    ``draws`` holds the successful replicates in replicate-index order.
    """

    point: MediationDecomposition
    draws: dict[str, np.ndarray]
    replicates: int
    failures: int
    seed: int
    cluster: Optional[str] = None
    cis: dict[str, BootstrapCI] = field(default_factory=dict)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.replicates

    @property
    def status(self) -> str:
        return "warning" if self.failure_rate > FAILURE_WARNING_RATE else "ok"

    def interval(self, quantity: str, level: float = 0.95) -> tuple[float, float]:
        tail = 50.0 * (1.0 - level)
        lower, upper = np.percentile(self.draws[quantity], [tail, 100.0 - tail])
        return float(lower), float(upper)

    def ci(self, quantity: str, level: float = 0.95) -> BootstrapCI:
        lower, upper = self.interval(quantity, level)
        return BootstrapCI(
            quantity=quantity,
            point=self.point.quantities()[quantity],
            lower=lower,
            upper=upper,
            se=float(np.std(self.draws[quantity], ddof=1)),
            level=level,
        )

    def __getitem__(self, quantity: str) -> BootstrapCI:
        return self.cis[quantity]


def _resample(
    frame: pd.DataFrame, rng: np.random.Generator, cluster: Optional[str]
) -> pd.DataFrame:
    if cluster is None:
        return frame.iloc[rng.integers(0, len(frame), size=len(frame))]
    groups = frame.groupby(cluster, sort=True).indices
    labels = sorted(groups)
    picks = rng.integers(0, len(labels), size=len(labels))
    rows = np.concatenate([groups[labels[i]] for i in picks])
    return frame.iloc[rows]


def bootstrap_mediation(
    data: pd.DataFrame,
    spec: MediationSpec,
    *,
    replicates: int = DEFAULT_REPLICATES,
    seed: int,
    cluster: Optional[str] = None,
    level: float = 0.95,
    threads: Optional[int] = None,
) -> BootstrapResult:
    """Case-resampling bootstrap of the full system.

    Replicate ``r`` draws from its own counter-based stream of ``seed``, so
    results do not depend on ``threads``. With ``cluster`` whole clusters
    (e.g. platforms) are resampled instead of households. Replicates whose
    fit fails are dropped and counted.

    Raises:
        InvalidSpec: fewer than 100 replicates
        BootstrapCollapse: every replicate failed
    """
    if replicates < MIN_REPLICATES:
        raise InvalidSpec(f"Bootstrap needs at least {MIN_REPLICATES} replicates")
    columns = spec.columns + ([cluster] if cluster else [])
    frame = complete_cases(data, columns)
    _check_size(frame, spec)
    point = _fit_system(frame, spec)

    def replicate(index: int) -> Optional[dict[str, float]]:
        sample = _resample(frame, replicate_rng(seed, index), cluster)
        try:
            return _fit_system(sample.reset_index(drop=True), spec).quantities()
        except (AIWashingError, linalg.LinAlgError) as exc:
            logger.debug("Bootstrap replicate %d failed: %s", index, exc)
            return None

    outcomes = run_indexed(replicate, replicates, threads)
    kept = [o for o in outcomes if o is not None]
    failures = replicates - len(kept)
    if not kept:
        raise BootstrapCollapse(replicates)
    if failures / replicates > FAILURE_WARNING_RATE:
        logger.warning(
            "%d of %d bootstrap replicates failed (%.1f%%)",
            failures,
            replicates,
            100.0 * failures / replicates,
        )

    draws = {q: np.array([o[q] for o in kept]) for q in QUANTITIES}
    result = BootstrapResult(
        point=point,
        draws=draws,
        replicates=replicates,
        failures=failures,
        seed=seed,
        cluster=cluster,
    )
    result.cis.update({q: result.ci(q, level) for q in QUANTITIES})
    return result


@dataclass(frozen=True, eq=False)
class MediationReport:
    panel_a: pd.DataFrame
    panel_b: Optional[pd.DataFrame]

    def to_frame(self) -> pd.DataFrame:
        """Both panels stacked with a ``panel`` column."""
        frames = [self.panel_a.assign(panel="A")]
        if self.panel_b is not None:
            frames.append(self.panel_b.assign(panel="B"))
        stacked = pd.concat(frames, ignore_index=True)
        return stacked[["panel", *[c for c in stacked.columns if c != "panel"]]]

    def text(self) -> str:
        out = format_table(self.panel_a, title="Panel A: path coefficients")
        if self.panel_b is not None:
            out += "\n" + format_table(
                self.panel_b,
                title="Panel B: indirect effects (percentile bootstrap)",
                note="proportion = effect / total effect; share = effect / total indirect",
            )
        return out


def decomposition_report(
    dec: MediationDecomposition, cis: Optional[BootstrapResult] = None
) -> MediationReport:
    """Panel A path table and, with bootstrap results, the Panel B effect table.

    Proportions are literal ratios to the total effect; a total within 1e-12
    of zero leaves them undefined (NaN).
    """
    panel_a = pd.DataFrame(
        [
            ("a1", dec.a1.coef, dec.a1.z, dec.a1.se),
            ("a2", dec.a2.coef, dec.a2.z, dec.a2.se),
            ("b1", dec.b1.coef, dec.b1.z, dec.b1.se),
            ("b2", dec.b2.coef, dec.b2.z, dec.b2.se),
            ("c_prime", dec.c_prime.coef, dec.c_prime.z, dec.c_prime.se),
        ],
        columns=["path", "coef", "z", "se"],
    )
    if cis is None:
        return MediationReport(panel_a, None)

    def undefined(value: Optional[float]) -> float:
        return float("nan") if value is None else value

    rows = []
    for quantity, value, with_shares in (
        ("indirect_1", dec.indirect_1, True),
        ("indirect_2", dec.indirect_2, True),
        ("total_indirect", dec.total_indirect, True),
        ("c_prime", dec.c_prime.coef, False),
        ("total_effect", dec.total_effect, False),
    ):
        ci = cis.cis[quantity]
        rows.append(
            (
                quantity,
                value,
                ci.se,
                ci.lower,
                ci.upper,
                undefined(dec.proportion(value)) if with_shares else float("nan"),
                undefined(dec.share_of_indirect(value)) if with_shares else float("nan"),
            )
        )
    panel_b = pd.DataFrame(
        rows,
        columns=["path", "indirect", "boot_se", "ci_lo", "ci_hi", "proportion", "share_of_indirect"],
    )
    return MediationReport(panel_a, panel_b)


def single_equation_total(data: pd.DataFrame, spec: MediationSpec) -> float:
    """Treatment coefficient with the mediators left out."""
    columns: Sequence[str] = [spec.treatment, *spec.controls]
    kind = ModelKind.BINARY_LOGIT if spec.outcome_link is OutcomeLink.LOGIT else ModelKind.OLS
    frame = complete_cases(data, spec.columns)
    return fit_model(frame, spec.outcome, columns, kind=kind).coefficients[spec.treatment]


__all__ = [
    "BootstrapCI",
    "BootstrapResult",
    "MediationDecomposition",
    "MediationReport",
    "MediationSpec",
    "PathEstimate",
    "QUANTITIES",
    "bootstrap_mediation",
    "decomposition_report",
    "fit_mediation",
    "single_equation_total",
]
