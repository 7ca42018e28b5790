"""Plain-text rendering of report tables."""

import math
from collections.abc import Sequence
from typing import Optional

import pandas as pd

UNDEFINED = "undefined"


def stars(p_value: float) -> str:
    """Significance marker at the 1%, 5% and 10% levels."""
    if not math.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.1:
        return "*"
    return ""


def format_number(value: object, digits: int = 3) -> str:
    if value is None:
        return UNDEFINED
    if isinstance(value, bool):
        return "Yes" if value else "No"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return UNDEFINED
        return f"{value:.{digits}f}"
    return str(value)


def format_percent(value: Optional[float], digits: int = 1) -> str:
    if value is None or not math.isfinite(value):
        return UNDEFINED
    return f"{100.0 * value:.{digits}f}%"


def coefficient_cell(coef: float, stat: float, p_value: float, digits: int = 3) -> str:
    """``-0.287*** (-6.78)`` style cell."""
    return f"{coef:.{digits}f}{stars(p_value)} ({stat:.2f})"


def format_table(
    frame: pd.DataFrame,
    *,
    title: Optional[str] = None,
    note: Optional[str] = None,
    digits: int = 3,
) -> str:
    """Render a frame as a left-aligned text block with a rule under the header."""
    header = [str(c) for c in frame.columns]
    body = [[format_number(v, digits) for v in row] for row in frame.itertuples(index=False)]
    widths = [
        max([len(header[j])] + [len(row[j]) for row in body]) for j in range(len(header))
    ]

    def line(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    lines = []
    if title:
        lines.append(title)
    lines += [rule, line(header), rule]
    lines += [line(row) for row in body]
    lines.append(rule)
    if note:
        lines.append(note)
    return "\n".join(lines) + "\n"


__all__ = [
    "UNDEFINED",
    "coefficient_cell",
    "format_number",
    "format_percent",
    "format_table",
    "stars",
]
