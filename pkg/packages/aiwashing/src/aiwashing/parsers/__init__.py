from .lexicon_parser import LexiconParser, parse_lexicon
from .table_parser import (
    CAPABILITY_COLUMNS,
    ColumnRule,
    ExclusionRule,
    TableParser,
    TableReport,
    Violation,
    household_parser,
    parse_capabilities,
)

__all__ = [
    "CAPABILITY_COLUMNS",
    "ColumnRule",
    "ExclusionRule",
    "LexiconParser",
    "TableParser",
    "TableReport",
    "Violation",
    "household_parser",
    "parse_capabilities",
    "parse_lexicon",
]
