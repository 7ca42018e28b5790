"""Schema checks for the household and capability CSV tables."""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from ..exceptions import SchemaMismatch
from ..models import CapabilityRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnRule:
    """Admissible values for one column.

    ``integer`` requires whole numbers; bounds are inclusive and optional.
    """

    column: str
    lo: Optional[float] = None
    hi: Optional[float] = None
    integer: bool = False

    def describe(self) -> str:
        lo = "-inf" if self.lo is None else f"{self.lo:g}"
        hi = "inf" if self.hi is None else f"{self.hi:g}"
        kind = "integer" if self.integer else "number"
        return f"{kind} in [{lo}, {hi}]"


@dataclass(frozen=True)
class ExclusionRule:
    """Rows matching the rule are dropped and counted, not reported as errors."""

    name: str
    column: str
    lo: Optional[float] = None
    hi: Optional[float] = None


@dataclass(frozen=True)
class Violation:
    line: int
    column: str
    value: str
    rule: str


@dataclass
class TableReport:
    name: str
    rows_read: int
    rows_kept: int = 0
    violations: list[Violation] = field(default_factory=list)
    dropped: dict[str, int] = field(default_factory=dict)

    @property
    def violating_rows(self) -> int:
        return len({v.line for v in self.violations})

    @property
    def violation_rate(self) -> float:
        return self.violating_rows / self.rows_read if self.rows_read else 0.0


class TableParser:
    """Validate a raw table against column rules and exclusion rules.

    Rows violating a ``ColumnRule`` are listed with their CSV line number and
    removed; rows hit by an ``ExclusionRule`` or missing a key column are
    removed and counted per rule.

    Example:
        parser = TableParser("households", rules, exclusions, key_columns=["y1_use"])
        clean, report = parser.parse(frame)
    """

    def __init__(
        self,
        name: str,
        rules: Sequence[ColumnRule],
        exclusions: Sequence[ExclusionRule] = (),
        *,
        key_columns: Sequence[str] = (),
        first_data_line: int = 2,
    ):
        self._name = name
        self._rules = list(rules)
        self._exclusions = list(exclusions)
        self._key_columns = list(key_columns)
        self._first_data_line = first_data_line

    def required_columns(self) -> list[str]:
        names = [r.column for r in self._rules]
        names += [e.column for e in self._exclusions]
        names += self._key_columns
        return list(dict.fromkeys(names))

    def parse(self, frame: pd.DataFrame) -> tuple[pd.DataFrame, TableReport]:
        required = self.required_columns()
        if any(c not in frame.columns for c in required):
            raise SchemaMismatch(required, list(frame.columns))

        report = TableReport(self._name, rows_read=len(frame))
        lines = np.arange(len(frame)) + self._first_data_line
        keep = np.ones(len(frame), dtype=bool)

        # Missing key variables
        if self._key_columns:
            missing = frame[self._key_columns].isna().any(axis=1).to_numpy()
            if missing.any():
                report.dropped["missing key variable"] = int(missing.sum())
            keep &= ~missing

        # Exclusion rules (counted, not violations)
        for rule in self._exclusions:
            values = pd.to_numeric(frame[rule.column], errors="coerce").to_numpy(float)
            hit = np.zeros(len(frame), dtype=bool)
            if rule.lo is not None:
                hit |= values < rule.lo
            if rule.hi is not None:
                hit |= values > rule.hi
            hit &= keep
            if hit.any():
                report.dropped[rule.name] = int(hit.sum())
            keep &= ~hit

        # Column rules
        for rule in self._rules:
            raw = frame[rule.column]
            values = pd.to_numeric(raw, errors="coerce").to_numpy(float)
            bad = raw.notna().to_numpy() & np.isnan(values)
            finite = ~np.isnan(values)
            if rule.lo is not None:
                bad |= finite & (values < rule.lo)
            if rule.hi is not None:
                bad |= finite & (values > rule.hi)
            if rule.integer:
                bad |= finite & (values != np.round(values))
            bad &= keep
            for idx in np.flatnonzero(bad):
                report.violations.append(
                    Violation(int(lines[idx]), rule.column, str(raw.iloc[idx]), rule.describe())
                )
            keep &= ~bad

        report.rows_kept = int(keep.sum())
        if report.dropped:
            logger.warning("%s: exclusion drops %s", self._name, report.dropped)
        report.violations.sort(key=lambda v: (v.line, v.column))
        return frame.loc[keep].reset_index(drop=True), report


def household_parser(
    bindings: Mapping[str, str], *, first_data_line: int = 2
) -> TableParser:
    """Build the household parser from role → column bindings.

    Recognised roles: ``binary_outcome``, ``ordinal_outcome``, ``knowledge``,
    ``risk``, ``moderator``, ``treatment``, ``age``, ``income``.
    """
    rules: list[ColumnRule] = []
    if "binary_outcome" in bindings:
        rules.append(ColumnRule(bindings["binary_outcome"], 0, 1, integer=True))
    if "ordinal_outcome" in bindings:
        rules.append(ColumnRule(bindings["ordinal_outcome"], 0, 7, integer=True))
    if "knowledge" in bindings:
        rules.append(ColumnRule(bindings["knowledge"], 0, 4, integer=True))
    if "risk" in bindings:
        rules.append(ColumnRule(bindings["risk"], 0, 3, integer=True))
    if "moderator" in bindings:
        rules.append(ColumnRule(bindings["moderator"], 0, None))

    exclusions: list[ExclusionRule] = []
    if "income" in bindings:
        exclusions.append(ExclusionRule("negative income", bindings["income"], lo=0.0))
    if "age" in bindings:
        exclusions.append(ExclusionRule("age outside [18, 100]", bindings["age"], 18, 100))

    keys = [
        bindings[role]
        for role in ("binary_outcome", "treatment", "age")
        if role in bindings
    ]
    return TableParser(
        "households", rules, exclusions, key_columns=keys, first_data_line=first_data_line
    )


CAPABILITY_COLUMNS = ["firm_id", "year", "talent_share", "patent_count", "rd_intensity"]


def parse_capabilities(
    frame: pd.DataFrame, *, first_data_line: int = 2
) -> tuple[list[CapabilityRecord], TableReport]:
    """Validate a capability table and build records from the surviving rows."""
    parser = TableParser(
        "capabilities",
        [
            ColumnRule("year", integer=True),
            ColumnRule("talent_share", 0, 1),
            ColumnRule("patent_count", 0, None, integer=True),
            ColumnRule("rd_intensity", 0, None),
        ],
        key_columns=CAPABILITY_COLUMNS,
        first_data_line=first_data_line,
    )
    clean, report = parser.parse(frame)
    records = [
        CapabilityRecord(
            firm_id=str(row.firm_id),
            year=int(row.year),
            talent_share=float(row.talent_share),
            patent_count=int(row.patent_count),
            rd_intensity=float(row.rd_intensity),
        )
        for row in clean.itertuples(index=False)
    ]
    return records, report
