"""Schema checks of every input table before any stage runs."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import pandas as pd

from aiwashing.exceptions import InvalidSpec, SchemaMismatch, ValidationFailed
from aiwashing.parsers.table_parser import (
    ColumnRule,
    TableParser,
    TableReport,
    household_parser,
    parse_capabilities,
)

from .config import BindingsConfig, InputsConfig

logger = logging.getLogger(__name__)

ABORT_THRESHOLD = 0.05


@dataclass
class InputValidation:
    """Reports per table plus the cleaned household table."""

    households: pd.DataFrame
    reports: list[TableReport] = field(default_factory=list)

    def worst(self) -> Optional[TableReport]:
        if not self.reports:
            return None
        return max(self.reports, key=lambda r: r.violation_rate)

    def violations_frame(self) -> pd.DataFrame:
        """Violations with their CSV line numbers, then one row per exclusion rule."""
        rows = []
        for report in self.reports:
            for v in report.violations:
                rows.append((report.name, "violation", v.line, v.column, v.value, v.rule, 1))
            for rule, count in report.dropped.items():
                rows.append((report.name, "dropped", None, "", "", rule, count))
        return pd.DataFrame(
            rows, columns=["table", "kind", "line", "column", "value", "rule", "count"]
        ).astype({"line": "Int64"})

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                (r.name, r.rows_read, r.rows_kept, r.violating_rows, sum(r.dropped.values()))
                for r in self.reports
            ],
            columns=["table", "rows_read", "rows_kept", "violating_rows", "dropped"],
        )


def _read(path: Optional[Path], name: str) -> pd.DataFrame:
    if path is None:
        raise InvalidSpec(f"No {name} configured; set [inputs].{name} or add a [datagen] block")
    return pd.read_csv(path, encoding="utf-8")


def _require(frame: pd.DataFrame, columns: list[str]) -> None:
    if any(c not in frame.columns for c in columns):
        raise SchemaMismatch(columns, list(frame.columns))


def validate_inputs(
    inputs: InputsConfig,
    bindings: BindingsConfig,
    *,
    need_treatment: bool = False,
    threshold: float = ABORT_THRESHOLD,
) -> InputValidation:
    """Check every configured CSV and apply the household exclusion rules.

    Rows outside their column ranges are listed with line numbers and
    removed. Rows with negative income, age outside [18, 100] or a missing
    key variable are dropped and counted.

    Raises:
        InvalidSpec: no household table is configured
        SchemaMismatch: a bound column is missing from its file
        ValidationFailed: a table has more than ``threshold`` violating rows
    """
    raw = _read(inputs.households_csv, "households_csv")
    needed = [
        bindings.binary_outcome,
        bindings.ordinal_outcome,
        *bindings.mediators,
        bindings.moderator,
        *bindings.controls,
    ]
    if need_treatment:
        needed.append(bindings.treatment)
    _require(raw, needed)

    households, report = household_parser(bindings.household_roles(raw.columns)).parse(raw)
    result = InputValidation(households, [report])

    if inputs.firms_csv is not None:
        _, capabilities = parse_capabilities(pd.read_csv(inputs.firms_csv))
        result.reports.append(capabilities)
    if inputs.usage_csv is not None:
        usage = TableParser(
            "usage_rates",
            [ColumnRule("year", integer=True), ColumnRule("usage_rate", 0, 1)],
            key_columns=["year", "usage_rate"],
        )
        result.reports.append(usage.parse(pd.read_csv(inputs.usage_csv))[1])
    if inputs.platforms_csv is not None:
        platforms = TableParser(
            "platforms", [ColumnRule("product_breadth")], key_columns=["firm_id", "product_breadth"]
        )
        result.reports.append(platforms.parse(pd.read_csv(inputs.platforms_csv))[1])

    for r in result.reports:
        logger.info(
            "%s: %d rows read, %d kept, %d violating", r.name, r.rows_read, r.rows_kept, r.violating_rows
        )
    worst = result.worst()
    if worst is not None and worst.violation_rate > threshold:
        raise ValidationFailed(
            worst.name, worst.violating_rows, worst.rows_read, threshold, report=result
        )
    return result


__all__ = ["ABORT_THRESHOLD", "InputValidation", "validate_inputs"]
