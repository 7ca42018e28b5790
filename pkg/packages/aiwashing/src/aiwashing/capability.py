"""Entropy-weighted real-capability composite (walk scores)."""

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np
import pandas as pd
from scipy.special import xlogy

from .exceptions import DuplicateFirm, InsufficientFirms, MixedYears
from .models import CapabilityRecord, EntropyWeights, FirmYearSeries, SeriesEntry

logger = logging.getLogger(__name__)

INDICATORS = ("talent", "patent", "rd")


def minmax_normalize(column: Sequence[float]) -> np.ndarray:
    """Map values onto [0, 1]; a constant column maps to 0.5 everywhere."""
    values = np.asarray(column, dtype=float)
    if values.size == 0:
        raise ValueError("Cannot normalize an empty column")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def entropy_divergence(matrix: np.ndarray) -> np.ndarray:
    """Per-column divergence d_j = 1 - e_j of a normalized indicator matrix."""
    x = np.asarray(matrix, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise InsufficientFirms(n)

    totals = x.sum(axis=0)
    divergence = np.zeros(x.shape[1])
    for j in range(x.shape[1]):
        if totals[j] <= 0.0:
            continue
        p = x[:, j] / totals[j]
        entropy = -xlogy(p, p).sum() / np.log(n)
        divergence[j] = max(0.0, 1.0 - entropy)
    return divergence


def entropy_weights(
    matrix: np.ndarray, labels: Sequence[str] = INDICATORS
) -> EntropyWeights:
    """Entropy-method weights for an n × k matrix of [0, 1] indicators.

    Columns with zero sum or uniform shares carry no information and get
    weight 0. When every column is uninformative the weights are uniform.

    Raises:
        InsufficientFirms: fewer than two rows
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise ValueError("Entropy weights need a 2-D matrix")
    labels = tuple(labels) if len(labels) == x.shape[1] else tuple(f"x{j}" for j in range(x.shape[1]))

    divergence = entropy_divergence(x)
    total = divergence.sum()
    if total <= 0.0:
        return EntropyWeights(tuple(1.0 / x.shape[1] for _ in range(x.shape[1])), labels)

    weights = divergence / total
    return EntropyWeights(tuple(float(w) for w in weights), labels)


def indicator_matrix(records: Sequence[CapabilityRecord]) -> np.ndarray:
    """Normalized n × 3 matrix: talent, ln(1 + patents), R&D, each min-max scaled."""
    talent = [r.talent_share for r in records]
    patents = np.log1p([float(r.patent_count) for r in records])
    rd = [r.rd_intensity for r in records]
    return np.column_stack(
        [minmax_normalize(talent), minmax_normalize(patents), minmax_normalize(rd)]
    )


def _check_cross_section(records: Sequence[CapabilityRecord]) -> int:
    years = {r.year for r in records}
    if len(years) > 1:
        raise MixedYears(years)
    if len(records) < 2:
        raise InsufficientFirms(len(records))
    seen: set[str] = set()
    for r in records:
        if r.firm_id in seen:
            raise DuplicateFirm(r.firm_id, r.year)
        seen.add(r.firm_id)
    return next(iter(years))


def walk_scores(
    records: Sequence[CapabilityRecord],
    *,
    weights: EntropyWeights | None = None,
) -> FirmYearSeries:
    """Composite capability score of every firm in one year.

    Weights are estimated from the same cross-section unless supplied (pooled
    or equal-weight robustness runs pass them in).

    Raises:
        DuplicateFirm: a firm appears twice
        InsufficientFirms: fewer than two firms
        MixedYears: records span several years
    """
    year = _check_cross_section(records)
    matrix = indicator_matrix(records)
    w = weights if weights is not None else entropy_weights(matrix)
    scores = np.clip(matrix @ w.as_array(), 0.0, 1.0)
    return FirmYearSeries(
        tuple(SeriesEntry(r.firm_id, year, float(s)) for r, s in zip(records, scores)),
        "walk_score",
    )


def walk_panel(
    records: Sequence[CapabilityRecord],
    *,
    pooled_weights: bool = False,
    weights: EntropyWeights | None = None,
) -> tuple[FirmYearSeries, dict[int, EntropyWeights]]:
    """Walk scores for every year of a panel plus the weights used per year.

    With ``pooled_weights`` one weight vector is estimated from the stacked
    within-year normalized matrices and applied to every year.
    """
    by_year: dict[int, list[CapabilityRecord]] = defaultdict(list)
    for r in records:
        by_year[r.year].append(r)
    for year_records in by_year.values():
        _check_cross_section(year_records)

    years = sorted(by_year)
    if weights is None and pooled_weights:
        stacked = np.vstack([indicator_matrix(by_year[y]) for y in years])
        weights = entropy_weights(stacked)
        logger.debug("Pooled entropy weights: %s", weights.weights)

    entries: list[SeriesEntry] = []
    used: dict[int, EntropyWeights] = {}
    for year in years:
        year_records = by_year[year]
        w = weights if weights is not None else entropy_weights(indicator_matrix(year_records))
        used[year] = w
        entries.extend(walk_scores(year_records, weights=w).entries)
    return FirmYearSeries(tuple(entries), "walk_score"), used


def weights_frame(weights: dict[int, EntropyWeights]) -> pd.DataFrame:
    """Render per-year weights as the ``year,w_talent,w_patent,w_rd`` sidecar."""
    return pd.DataFrame(
        {
            "year": list(weights),
            "w_talent": [w.w_talent for w in weights.values()],
            "w_patent": [w.w_patent for w in weights.values()],
            "w_rd": [w.w_rd for w in weights.values()],
        }
    )


def records_from_frame(frame: pd.DataFrame) -> list[CapabilityRecord]:
    return [
        CapabilityRecord(
            firm_id=str(row.firm_id),
            year=int(row.year),
            talent_share=float(row.talent_share),
            patent_count=int(row.patent_count),
            rd_intensity=float(row.rd_intensity),
        )
        for row in frame.itertuples(index=False)
    ]


__all__ = [
    "INDICATORS",
    "entropy_divergence",
    "entropy_weights",
    "indicator_matrix",
    "minmax_normalize",
    "records_from_frame",
    "walk_panel",
    "walk_scores",
    "weights_frame",
]
