"""Exception hierarchy shared by the parser, jet evaluator and geometry code."""

from __future__ import annotations


class CanonFieldError(Exception):
    """Base class for every error raised by this package."""


class SpecSyntaxError(CanonFieldError):
    """Malformed immersion source. Carries the 1-based line/column and the tokens expected there."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        where = f"line {line}, column {col}"
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}: {message}{hint}")


class UnknownIdentifier(CanonFieldError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown identifier {name!r}")


class DimensionMismatch(CanonFieldError):
    pass


class DomainError(CanonFieldError):
    pass


class EvalError(CanonFieldError):
    pass


class UnknownCatalogEntry(CanonFieldError):
    pass


class MissingParameter(CanonFieldError):
    pass


class RankDeficient(CanonFieldError):
    """The tangent vectors are (numerically) linearly dependent: not an immersion point."""


class NotNormal(CanonFieldError):
    pass


class OrderTooLow(CanonFieldError):
    pass


class TooFewPoints(CanonFieldError):
    pass


class DimensionTooLow(CanonFieldError):
    pass


class ConfigError(CanonFieldError):
    pass


class CheckSkipped(CanonFieldError):
    """A check whose hypotheses do not hold on the sample. Not a failure."""

    reason = "skipped"


class SkippedNotConformal(CheckSkipped):
    reason = "not-conformal"


class SkippedNonconstantPhi(CheckSkipped):
    reason = "nonconstant-phi"


class SkippedMissingPrereq(CheckSkipped):
    reason = "missing-prerequisite"
