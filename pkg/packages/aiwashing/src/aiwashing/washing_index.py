"""The talk-minus-walk signal-gap index and its descriptive trend statistics."""

import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy import stats

from .capability import walk_panel
from .corpus_text import Document, Tokenizer, score_documents
from .exceptions import DegenerateYear, InsufficientData, SeriesMisaligned
from .models import (
    CapabilityRecord,
    EntropyWeights,
    FirmYearSeries,
    Lexicon,
    SeriesEntry,
    Standardization,
)
from .utils import tokenize

logger = logging.getLogger(__name__)


def _standardize(values: np.ndarray, year: int) -> np.ndarray:
    if values.size < 2:
        raise DegenerateYear(year)
    sd = values.std(ddof=1)
    if not sd > 0.0:
        raise DegenerateYear(year)
    return (values - values.mean()) / sd


def zscore(
    series: FirmYearSeries, mode: Standardization = Standardization.WITHIN_YEAR
) -> FirmYearSeries:
    """Standardize a series to mean 0 and sample SD 1.

    ``within_year`` standardizes each cross-section separately, ``pooled``
    uses one mean and SD for the whole panel and ``none`` returns the series
    unchanged. Entry order is preserved.

    Raises:
        DegenerateYear: a year has fewer than two firms or zero spread
    """
    mode = Standardization(mode)
    if mode is Standardization.NONE:
        return series

    values = np.array([e.value for e in series.entries])
    out = np.empty_like(values)
    if mode is Standardization.POOLED:
        out[:] = _standardize(values, year=0)
    else:
        positions: dict[int, list[int]] = defaultdict(list)
        for i, entry in enumerate(series.entries):
            positions[entry.year].append(i)
        for year, idx in positions.items():
            out[idx] = _standardize(values[idx], year)
    return series.with_values(out)


def washing(
    talk: FirmYearSeries,
    walk: FirmYearSeries,
    *,
    standardization: Standardization = Standardization.WITHIN_YEAR,
    name: str = "ai_washing",
) -> FirmYearSeries:
    """Signal gap z(talk) − z(walk), keyed and ordered like ``talk``.

    Positive values mark over-promotion relative to real capability.

    Raises:
        SeriesMisaligned: the two series do not share their firm-year keys
    """
    missing = talk.keys() ^ walk.keys()
    if missing:
        raise SeriesMisaligned(missing)

    talk_std = zscore(talk, standardization)
    walk_std = zscore(walk, standardization).as_dict()
    return FirmYearSeries(
        tuple(
            SeriesEntry(e.firm_id, e.year, e.value - walk_std[(e.firm_id, e.year)])
            for e in talk_std.entries
        ),
        name,
    )


@dataclass(frozen=True)
class TrendReport:
    """Yearly index means against usage, plus the platform cross-section fit."""

    yearly_means: dict[int, float]
    correlation: float
    scatter_slope: float
    scatter_t: float
    scatter_intercept: float = 0.0
    usage_rate: dict[int, float] = field(default_factory=dict)
    n_years: int = 0
    n_points: int = 0

    def series_frame(self) -> pd.DataFrame:
        """Dual-axis series ``year,mean_index,usage_rate``."""
        years = sorted(self.yearly_means)
        return pd.DataFrame(
            {
                "year": years,
                "mean_index": [self.yearly_means[y] for y in years],
                "usage_rate": [self.usage_rate.get(y, np.nan) for y in years],
            }
        )

    def to_frame(self) -> pd.DataFrame:
        rows = [("correlation", self.correlation), ("n_years", self.n_years)]
        rows += [
            ("scatter_slope", self.scatter_slope),
            ("scatter_intercept", self.scatter_intercept),
            ("scatter_t", self.scatter_t),
            ("n_points", self.n_points),
        ]
        rows += [(f"mean_index_{y}", v) for y, v in sorted(self.yearly_means.items())]
        return pd.DataFrame(rows, columns=["statistic", "value"])


def yearly_means(
    index: FirmYearSeries,
    weights: Optional[Mapping[tuple[str, int], float]] = None,
) -> dict[int, float]:
    """Mean index per year, optionally weighted by platform user shares."""
    means: dict[int, float] = {}
    for year in index.years():
        entries = index.for_year(year)
        values = np.array([e.value for e in entries])
        if weights is None:
            means[year] = float(values.mean())
            continue
        w = np.array([weights.get((e.firm_id, e.year), 0.0) for e in entries])
        if not w.sum() > 0.0:
            raise InsufficientData(f"Platform shares for {year} sum to zero")
        means[year] = float(np.average(values, weights=w))
    return means


def trend_report(
    index: FirmYearSeries,
    usage_rate: Mapping[int, float],
    cross_section: Sequence[tuple[float, float]],
    *,
    weights: Optional[Mapping[tuple[str, int], float]] = None,
) -> TrendReport:
    """Correlate yearly index means with usage and fit breadth on the index.

    Raises:
        InsufficientData: fewer than two common years, fewer than three
            scatter points, or a zero-variance axis
    """
    means = yearly_means(index, weights)
    years = sorted(set(means) & set(usage_rate))
    if len(years) < 2:
        raise InsufficientData(f"Need at least 2 years with usage data, got {len(years)}")

    x = np.array([means[y] for y in years])
    u = np.array([float(usage_rate[y]) for y in years])
    if np.ptp(x) == 0.0 or np.ptp(u) == 0.0:
        raise InsufficientData("Correlation undefined: an axis has zero variance")
    correlation = float(np.clip(np.corrcoef(x, u)[0, 1], -1.0, 1.0))

    points = np.asarray(cross_section, dtype=float).reshape(-1, 2)
    if len(points) < 3:
        raise InsufficientData(f"Need at least 3 scatter points, got {len(points)}")
    if np.unique(points[:, 0]).size < 2:
        raise InsufficientData("Scatter slope undefined: fewer than 2 distinct index values")
    fit = stats.linregress(points[:, 0], points[:, 1])
    slope = float(fit.slope)
    t_stat = slope / fit.stderr if fit.stderr > 0 else float(np.copysign(np.inf, slope))

    return TrendReport(
        yearly_means=means,
        correlation=correlation,
        scatter_slope=slope,
        scatter_t=float(t_stat),
        scatter_intercept=float(fit.intercept),
        usage_rate={y: float(usage_rate[y]) for y in years},
        n_years=len(years),
        n_points=len(points),
    )


class IndexSummary(NamedTuple):
    mean: float
    sd: float
    min: float
    max: float
    n: int


def household_index_summary(values: Iterable[float]) -> IndexSummary:
    """Descriptive row for the household-level index (sample SD)."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        raise InsufficientData("Need at least 2 households to describe the index")
    return IndexSummary(
        float(arr.mean()), float(arr.std(ddof=1)), float(arr.min()), float(arr.max()), int(arr.size)
    )


def attach_index(
    households: pd.DataFrame,
    index: FirmYearSeries,
    *,
    year: Optional[int] = None,
    column: Optional[str] = None,
) -> pd.DataFrame:
    """Copy each household's platform index value into ``column``.

    Households are matched on ``firm_id`` and on their own ``year`` column,
    or on ``year`` when given.

    Raises:
        SeriesMisaligned: a household's platform has no index value
    """
    column = column or index.name
    lookup = index.as_dict()
    firms = households["firm_id"].astype(str)
    if year is not None:
        years = np.full(len(households), int(year))
    else:
        years = households["year"].astype(int).to_numpy()

    keys = list(zip(firms, years))
    missing = {k for k in keys if k not in lookup}
    if missing:
        raise SeriesMisaligned(missing)

    out = households.copy()
    out[column] = [lookup[k] for k in keys]
    return out


@dataclass(frozen=True)
class IndexPanel:
    """Every series produced while building the firm-year index."""

    talk: FirmYearSeries
    walk: FirmYearSeries
    talk_std: FirmYearSeries
    walk_std: FirmYearSeries
    washing: FirmYearSeries
    washing_pooled: FirmYearSeries
    washing_raw: FirmYearSeries
    washing_equal_weights: FirmYearSeries
    weights: dict[int, EntropyWeights]
    standardization: Standardization = Standardization.WITHIN_YEAR

    def to_frame(self, *, alternatives: bool = False) -> pd.DataFrame:
        frame = self.talk_std.to_frame().rename(columns={self.talk_std.name: "ai_talk_std"})
        keys = list(zip(frame["firm_id"], frame["year"]))
        columns = {"ai_walk_std": self.walk_std, "ai_washing": self.washing}
        if alternatives:
            columns["ai_washing_raw"] = self.washing_raw
            columns["ai_washing_equal_weights"] = self.washing_equal_weights
            columns["ai_washing_pooled"] = self.washing_pooled
        for column, series in columns.items():
            lookup = series.as_dict()
            frame[column] = [lookup[k] for k in keys]
        return frame.sort_values(["year", "firm_id"], kind="mergesort").reset_index(drop=True)


def build_index(
    documents: Iterable[Document],
    records: Sequence[CapabilityRecord],
    lexicon: Lexicon,
    *,
    standardization: Standardization = Standardization.WITHIN_YEAR,
    pooled_weights: bool = False,
    walk_weights: Optional[EntropyWeights] = None,
    tokenizer: Tokenizer = tokenize,
) -> IndexPanel:
    """Score documents and capabilities, then assemble every index variant.

    Raises:
        SeriesMisaligned: documents and capability records cover different
            firm-years
    """
    talk_scores = score_documents(documents, lexicon, tokenizer=tokenizer)
    talk = FirmYearSeries(
        tuple(SeriesEntry(s.firm_id, s.year, s.score) for s in talk_scores), "talk_score"
    )
    walk_unordered, weights = walk_panel(
        records, pooled_weights=pooled_weights, weights=walk_weights
    )
    missing = talk.keys() ^ walk_unordered.keys()
    if missing:
        raise SeriesMisaligned(missing)

    # Align walk entries to talk order
    walk_values = walk_unordered.as_dict()
    walk = talk.with_values((walk_values[(e.firm_id, e.year)] for e in talk.entries), "walk_score")

    equal_walk, _ = walk_panel(records, weights=EntropyWeights.uniform())
    equal_values = equal_walk.as_dict()
    walk_equal = talk.with_values(
        (equal_values[(e.firm_id, e.year)] for e in talk.entries), "walk_score"
    )

    talk_z = zscore(talk, standardization)
    walk_z = zscore(walk, standardization)
    talk_std = talk_z.with_values((e.value for e in talk_z.entries), "ai_talk_std")
    walk_std = walk_z.with_values((e.value for e in walk_z.entries), "ai_walk_std")
    logger.info(
        "Built index for %d firm-years over %d years", len(talk), len(talk.years())
    )
    return IndexPanel(
        talk=talk,
        walk=walk,
        talk_std=talk_std,
        walk_std=walk_std,
        washing=washing(talk, walk, standardization=standardization),
        washing_pooled=washing(
            talk, walk, standardization=Standardization.POOLED, name="ai_washing_pooled"
        ),
        washing_raw=washing(
            talk, walk, standardization=Standardization.NONE, name="ai_washing_raw"
        ),
        washing_equal_weights=washing(
            talk, walk_equal, standardization=standardization, name="ai_washing_equal_weights"
        ),
        weights=weights,
        standardization=Standardization(standardization),
    )


__all__ = [
    "IndexPanel",
    "IndexSummary",
    "TrendReport",
    "attach_index",
    "build_index",
    "household_index_summary",
    "trend_report",
    "washing",
    "yearly_means",
    "zscore",
]
