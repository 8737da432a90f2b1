"""Exception hierarchy shared by all modules."""


class StressError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(StressError):
    """A linear system had no usable pivot.

    ``subset`` holds the 1-based vertex labels whose extended position
    columns formed the singular system, when known.
    """

    def __init__(self, message, subset=None):
        super().__init__(message)
        self.subset = tuple(subset) if subset is not None else None


class DegenerateSpan(StressError):
    """The points do not affinely span the ambient space."""


class NotSymmetric(StressError):
    pass


class DimensionMismatch(StressError):
    pass


class ParseError(StressError):
    """Malformed input text; carries optional line and field diagnostics."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class VertexIndexError(ParseError, IndexError):
    """A vertex or anchor index is out of range."""


class NotFound(StressError):
    """No lateration ordering exists (or a supplied one is invalid)."""


class BudgetExhausted(StressError):
    """A search gave up before reaching a verdict."""


class VerificationFailed(StressError):
    """A constructed certificate did not pass its own verifier."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalBreakdown(VerificationFailed):
    """Float computation overflowed or produced non-finite entries."""
