import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import stats

from .exceptions import InvalidRecord, SeriesMisaligned


class ModelKind(StrEnum):
    BINARY_LOGIT = "binary_logit"
    ORDERED_LOGIT = "ordered_logit"
    OLS = "ols"


class OutcomeLink(StrEnum):
    LOGIT = "logit"
    LINEAR = "linear"


class Standardization(StrEnum):
    WITHIN_YEAR = "within_year"
    POOLED = "pooled"
    NONE = "none"


class SplitKind(StrEnum):
    MEDIAN = "median"
    THRESHOLD = "threshold"
    BINARY = "binary"


class CoefficientSource(StrEnum):
    FITTED = "fitted"
    SUPPLIED = "supplied"


class StageStatus(StrEnum):
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class LexiconEntry:
    phrase: str
    weight: float = 1.0


@dataclass(frozen=True)
class Lexicon:
    """Normalized keyword set used to score promotional intensity.

    Entries are kept sorted by phrase so two lexicons with the same content
    compare equal regardless of the order they were read in.
    """

    entries: tuple[LexiconEntry, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.entries, key=lambda e: e.phrase))
        object.__setattr__(self, "entries", ordered)

    @property
    def phrases(self) -> list[str]:
        return [e.phrase for e in self.entries]

    @property
    def weights(self) -> dict[str, float]:
        return {e.phrase: e.weight for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, phrase: str) -> bool:
        return any(e.phrase == phrase for e in self.entries)


@dataclass(frozen=True)
class DocumentTermStats:
    firm_id: str
    year: int
    term_counts: dict[str, int]
    doc_token_count: int

    def __post_init__(self) -> None:
        if self.doc_token_count < 1:
            raise InvalidRecord("doc_token_count", self.doc_token_count)
        if any(c < 0 for c in self.term_counts.values()):
            raise InvalidRecord("term_counts", self.term_counts, "negative count")
        if sum(self.term_counts.values()) > self.doc_token_count:
            raise InvalidRecord(
                "term_counts", sum(self.term_counts.values()), "exceeds doc_token_count"
            )

    @property
    def total_hits(self) -> int:
        return sum(self.term_counts.values())


@dataclass(frozen=True)
class TalkScore:
    firm_id: str
    year: int
    score: float


@dataclass(frozen=True)
class CapabilityRecord:
    """One firm-year of real AI capability indicators."""

    firm_id: str
    year: int
    talent_share: float
    patent_count: int
    rd_intensity: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.talent_share <= 1.0) or math.isnan(self.talent_share):
            raise InvalidRecord("talent_share", self.talent_share)
        if self.patent_count < 0:
            raise InvalidRecord("patent_count", self.patent_count)
        if not self.rd_intensity >= 0.0:
            raise InvalidRecord("rd_intensity", self.rd_intensity)


@dataclass(frozen=True)
class EntropyWeights:
    """Objective indicator weights from the entropy method."""

    weights: tuple[float, ...]
    labels: tuple[str, ...] = ("talent", "patent", "rd")

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.labels):
            raise InvalidRecord("weights", self.weights, "length does not match labels")
        if any(w < 0 for w in self.weights) or abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise InvalidRecord("weights", self.weights, "must be non-negative and sum to 1")

    @classmethod
    def uniform(cls, k: int = 3) -> "EntropyWeights":
        labels = ("talent", "patent", "rd") if k == 3 else tuple(f"x{j}" for j in range(k))
        return cls(tuple(1.0 / k for _ in range(k)), labels)

    @property
    def w_talent(self) -> float:
        return self.weights[self.labels.index("talent")]

    @property
    def w_patent(self) -> float:
        return self.weights[self.labels.index("patent")]

    @property
    def w_rd(self) -> float:
        return self.weights[self.labels.index("rd")]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class SeriesEntry:
    firm_id: str
    year: int
    value: float


@dataclass(frozen=True)
class FirmYearSeries:
    """Per-firm, per-year scalar series (talk, walk or washing)."""

    entries: tuple[SeriesEntry, ...]
    name: str = "value"

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        seen: set[tuple[str, int]] = set()
        for entry in entries:
            key = (entry.firm_id, entry.year)
            if key in seen:
                raise InvalidRecord("firm_id/year", key, "duplicate key")
            if not math.isfinite(entry.value):
                raise InvalidRecord(self.name, entry.value, "must be finite")
            seen.add(key)

    @classmethod
    def from_mapping(
        cls, values: Mapping[tuple[str, int], float], name: str = "value"
    ) -> "FirmYearSeries":
        return cls(
            tuple(SeriesEntry(f, int(y), float(v)) for (f, y), v in values.items()),
            name,
        )

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, column: str, name: str | None = None
    ) -> "FirmYearSeries":
        return cls(
            tuple(
                SeriesEntry(str(f), int(y), float(v))
                for f, y, v in zip(frame["firm_id"], frame["year"], frame[column])
            ),
            name or column,
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SeriesEntry]:
        return iter(self.entries)

    def keys(self) -> set[tuple[str, int]]:
        return {(e.firm_id, e.year) for e in self.entries}

    def years(self) -> list[int]:
        return sorted({e.year for e in self.entries})

    def for_year(self, year: int) -> list[SeriesEntry]:
        return [e for e in self.entries if e.year == year]

    def as_dict(self) -> dict[tuple[str, int], float]:
        return {(e.firm_id, e.year): e.value for e in self.entries}

    def value(self, firm_id: str, year: int) -> float:
        for e in self.entries:
            if e.firm_id == firm_id and e.year == year:
                return e.value
        raise SeriesMisaligned([(firm_id, year)])

    def with_values(
        self, values: Iterable[float], name: str | None = None
    ) -> "FirmYearSeries":
        """Return a series with the same keys and replaced values."""
        return FirmYearSeries(
            tuple(
                SeriesEntry(e.firm_id, e.year, float(v))
                for e, v in zip(self.entries, values, strict=True)
            ),
            name or self.name,
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "firm_id": [e.firm_id for e in self.entries],
                "year": [e.year for e in self.entries],
                self.name: [e.value for e in self.entries],
            }
        )


class Interaction(NamedTuple):
    treatment: str
    moderator: str
    product: str


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimates and diagnostics of one fitted model.

    ``covariance`` follows ``columns`` and, for ordered fits, continues with
    the thresholds in order. For OLS fits ``pseudo_r2`` holds the ordinary R².
    """

    model_kind: ModelKind
    columns: tuple[str, ...]
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    z_values: dict[str, float]
    covariance: np.ndarray
    log_likelihood: float
    null_log_likelihood: float
    pseudo_r2: float
    n_obs: int
    converged: bool
    iterations: int
    thresholds: tuple[float, ...] = ()
    threshold_std_errors: tuple[float, ...] = ()
    outcome: str = ""
    interaction: Interaction | None = None
    centering: dict[str, float] = field(default_factory=dict)
    cluster_count: int | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([self.coefficients[c] for c in self.columns])

    @property
    def p_values(self) -> dict[str, float]:
        return {
            name: float(2.0 * stats.norm.sf(abs(z))) for name, z in self.z_values.items()
        }

    def confidence_interval(self, name: str, level: float = 0.95) -> tuple[float, float]:
        crit = float(stats.norm.ppf(0.5 + level / 2.0))
        coef = self.coefficients[name]
        se = self.std_errors[name]
        return coef - crit * se, coef + crit * se

    def index_of(self, name: str) -> int:
        return self.columns.index(name)


__all__ = [
    "CapabilityRecord",
    "CoefficientSource",
    "DocumentTermStats",
    "EntropyWeights",
    "FirmYearSeries",
    "FitResult",
    "Interaction",
    "Lexicon",
    "LexiconEntry",
    "ModelKind",
    "OutcomeLink",
    "SeriesEntry",
    "SplitKind",
    "StageStatus",
    "Standardization",
    "TalkScore",
]
