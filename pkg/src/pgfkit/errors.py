"""Exception types shared across the package.

Every analysis failure is an ``AnalysisError``; callers that want a single
catch-all (the CLI) can rely on that.  ``Divergent`` is *not* here on purpose:
a diverging evaluation is a result, not an error (see ``algebra.ratfun``).
"""


class AnalysisError(Exception):
    """Base class for all errors raised by this package."""


class DivisionByZero(AnalysisError):
    """Division by the zero polynomial / rational function."""


class SubstitutionPole(AnalysisError):
    """A substitution made a denominator identically zero."""


class ExpansionPole(AnalysisError):
    """Series expansion hit a denominator with no power-series inverse."""


class NegativeLeadingTerm(AnalysisError):
    """Square root of a series whose constant term is not positive."""


class NonSquareConstantTerm(AnalysisError):
    """Square root of a series whose constant term is no rational square."""


class BoundsMismatch(AnalysisError):
    """Arithmetic on truncated series with different bound boxes."""


class SymbolicIncomparable(AnalysisError):
    """Coefficient comparison needs a parameter valuation that was not given."""


class ProbabilityOutOfRange(AnalysisError):
    """A probability expression evaluated outside [0, 1] on a reachable state."""


class NoRuleMatches(AnalysisError):
    """No invariantlet rule covers the requested exponent vector."""


class NestedLoopBody(AnalysisError):
    """The loop body of a candidate closed-form loop contains another loop."""


class UnclassifiableVariable(AnalysisError):
    """A loop variable is neither bounded by the guard nor a pure counter."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class BoundsUnderestimated(AnalysisError):
    """Internal: a one-step truncated run overflowed its static bound box."""


class ParameterAtBoundary(AnalysisError):
    """A sign decision on a symbolic parameter value cannot be made."""


class SingularAfterRestriction(AnalysisError):
    """The reduced loop equation system has no unique solution."""


class ResidueNotRational(AnalysisError):
    """Internal: a roots-of-unity filter failed to cancel its root terms."""


class DivisionInexact(AnalysisError):
    """Internal: an exact rational-function division left a remainder."""


class ParseError(AnalysisError):
    """Syntax or static error in a source text, with position information."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.line = line
        self.col = col

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        if self.line:
            return f"{self.line}:{self.col}: {base}"
        return base
