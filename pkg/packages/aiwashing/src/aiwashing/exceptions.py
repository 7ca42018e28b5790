"""Custom exceptions for aiwashing."""

from collections.abc import Iterable


class AIWashingError(Exception):
    """Base class for every error raised by aiwashing."""


class EmptyLexicon(AIWashingError, ValueError):
    """Raised when a lexicon file holds no usable entries."""

    def __init__(self, source: str = "<memory>"):
        self.source = source
        super().__init__(f"Lexicon {source} contains no entries")


class InvalidWeight(AIWashingError, ValueError):
    """Raised when a lexicon line carries a non-positive or unparsable weight."""

    def __init__(self, line: int, value: str):
        self.line = line
        self.value = value
        super().__init__(f"Invalid lexicon weight {value!r} on line {line}")


class DuplicatePhrase(AIWashingError, ValueError):
    """Raised when two lexicon lines normalize to the same phrase."""

    def __init__(self, phrase: str, line: int):
        self.phrase = phrase
        self.line = line
        super().__init__(f"Duplicate lexicon phrase {phrase!r} on line {line}")


class EmptyCorpus(AIWashingError, ValueError):
    """Raised when a scoring pool has no documents."""

    def __init__(self) -> None:
        super().__init__("Cannot score an empty corpus")


class InsufficientFirms(AIWashingError, ValueError):
    """Raised when a cross-section has fewer than two firms."""

    def __init__(self, n: int):
        self.n = n
        super().__init__(f"Entropy weighting needs at least 2 firms, got {n}")


class DuplicateFirm(AIWashingError, ValueError):
    """Raised when a firm appears twice in one year."""

    def __init__(self, firm_id: str, year: int):
        self.firm_id = firm_id
        self.year = year
        super().__init__(f"Firm {firm_id!r} appears more than once in {year}")


class MixedYears(AIWashingError, ValueError):
    """Raised when a single-year operation receives several years."""

    def __init__(self, years: Iterable[int]):
        self.years = sorted(set(years))
        super().__init__(f"Expected records for one year, got {self.years}")


class InvalidRecord(AIWashingError, ValueError):
    """Raised when a record field is outside its admissible range."""

    def __init__(self, field: str, value: object, reason: str = "out of range"):
        self.field = field
        self.value = value
        super().__init__(f"Invalid {field}={value!r}: {reason}")


class DegenerateYear(AIWashingError, ValueError):
    """Raised when a year cannot be standardized (too few firms or zero spread)."""

    def __init__(self, year: int):
        self.year = year
        super().__init__(f"Cannot standardize year {year}: zero standard deviation")


class SeriesMisaligned(AIWashingError, ValueError):
    """Raised when two firm-year series do not share their keys."""

    def __init__(self, missing: Iterable[tuple[str, int]]):
        self.missing = sorted(missing)
        preview = ", ".join(f"{f}/{y}" for f, y in self.missing[:5])
        more = "" if len(self.missing) <= 5 else f" (+{len(self.missing) - 5} more)"
        super().__init__(f"Series keys do not match: {preview}{more}")


class InsufficientData(AIWashingError, ValueError):
    """Raised when a statistic is undefined for the data supplied."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class InvalidDesign(AIWashingError, ValueError):
    """Raised when a design matrix violates its structural invariants."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class SingularDesign(AIWashingError, ValueError):
    """Raised when design columns are collinear or constant."""

    def __init__(self, columns: Iterable[str]):
        self.columns = list(columns)
        super().__init__(f"Singular design; collinear columns: {', '.join(self.columns)}")


class InvalidOutcome(AIWashingError, ValueError):
    """Raised when the outcome vector has the wrong coding."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class DegenerateOutcome(AIWashingError, ValueError):
    """Raised when the outcome has a single observed class."""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Outcome takes a single value ({value}); nothing to fit")


class SparseLevel(AIWashingError, ValueError):
    """Raised when an interior ordinal level is never observed."""

    def __init__(self, level: int):
        self.level = level
        super().__init__(f"Ordinal level {level} is not observed; merge it first")


class PerfectSeparation(AIWashingError):
    """Raised when the linear index diverges while the likelihood still improves."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"Perfect separation detected at iteration {iteration}")


class SingularHessian(AIWashingError):
    """Raised when the information matrix cannot be inverted."""

    def __init__(self, iteration: int | None = None):
        self.iteration = iteration
        where = "" if iteration is None else f" at iteration {iteration}"
        super().__init__(f"Information matrix is singular{where}")


class SchemaMismatch(AIWashingError, ValueError):
    """Raised when a table or design does not carry the expected columns."""

    def __init__(self, expected: Iterable[str], got: Iterable[str]):
        self.expected = list(expected)
        self.got = list(got)
        missing = [c for c in self.expected if c not in set(self.got)]
        detail = f"missing {missing}" if missing else f"expected {self.expected}, got {self.got}"
        super().__init__(f"Schema mismatch: {detail}")


class UnknownColumn(AIWashingError, ValueError):
    """Raised when a column name is not part of the design."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown column {name!r}")


class InvalidSpec(AIWashingError, ValueError):
    """Raised when a model specification breaks its invariants."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class BootstrapCollapse(AIWashingError):
    """Raised when every bootstrap replicate failed."""

    def __init__(self, replicates: int):
        self.replicates = replicates
        super().__init__(f"All {replicates} bootstrap replicates failed")


class GroupTooSmall(AIWashingError):
    """Raised when a split group cannot support its own fit."""

    def __init__(self, side: str, n: int):
        self.side = side
        self.n = n
        super().__init__(f"The {side} group ({n} rows) is too small or has one outcome class")


class NotAModerationFit(AIWashingError, ValueError):
    """Raised when simple slopes are requested from a fit without an interaction."""

    def __init__(self) -> None:
        super().__init__("Fit does not contain an interaction term")


class NoIdentification(AIWashingError):
    """Raised when the excluded instruments carry no first-stage signal."""

    def __init__(self, f_statistic: float):
        self.f_statistic = f_statistic
        super().__init__(f"Instruments do not identify the model (F = {f_statistic:.3g})")


class CalibrationFailure(AIWashingError):
    """Raised when the synthetic generator cannot reach its targets."""

    def __init__(self, target: str, diagnostic: str):
        self.target = target
        self.diagnostic = diagnostic
        super().__init__(f"Cannot calibrate {target}: {diagnostic}")



class ValidationFailed(AIWashingError):
    """Raised when too many rows of an input table violate its schema."""

    def __init__(
        self,
        table: str,
        violating_rows: int,
        rows_read: int,
        threshold: float,
        report: object = None,
    ):
        self.table = table
        self.violating_rows = violating_rows
        self.rows_read = rows_read
        self.threshold = threshold
        self.report = report
        super().__init__(
            f"{table}: {violating_rows} of {rows_read} rows violate the schema "
            f"(abort above {threshold:.0%})"
        )


__all__ = [
    "AIWashingError",
    "BootstrapCollapse",
    "CalibrationFailure",
    "DegenerateOutcome",
    "DegenerateYear",
    "DuplicateFirm",
    "DuplicatePhrase",
    "EmptyCorpus",
    "EmptyLexicon",
    "GroupTooSmall",
    "InsufficientData",
    "InsufficientFirms",
    "InvalidDesign",
    "InvalidOutcome",
    "InvalidRecord",
    "InvalidSpec",
    "InvalidWeight",
    "MixedYears",
    "NoIdentification",
    "NotAModerationFit",
    "PerfectSeparation",
    "SchemaMismatch",
    "SeriesMisaligned",
    "SingularDesign",
    "SingularHessian",
    "SparseLevel",
    "UnknownColumn",
    "ValidationFailed",
]
