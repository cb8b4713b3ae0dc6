"""
Exception hierarchy for the monodromy toolkit.

Bad argument shapes derive from ValueError so callers that only know the
standard library still catch them; numeric breakdowns derive from
NumericFailure so the CLI can map them to their own exit code.
"""


class MonodromyError(Exception):
    """Base class of every error raised by monodromy_core."""


class DimensionMismatch(MonodromyError, ValueError):
    """Matrix operands of incompatible sizes."""


class SingularMatrix(MonodromyError, ValueError):
    """An LU pivot fell below the singularity threshold."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class DegenerateForm(MonodromyError, ValueError):
    """Tr(H) is too small to build a reflection."""


class MTooLarge(MonodromyError, ValueError):
    """Number of F_C variables exceeds the enumeration or dense-size guard."""


class BlockStructureViolation(MonodromyError):
    """A reduction matrix is not block diagonal within tolerance."""

    def __init__(self, message, max_off_block=None):
        super().__init__(message)
        self.max_off_block = max_off_block


class EigenvectorDegenerate(MonodromyError):
    """The pinned eigenvector solve of the gauge fit is singular."""


class VanishingComponent(MonodromyError):
    """A component of the fitted lambda-eigenvector is numerically zero."""


class InvalidParameters(MonodromyError, ValueError):
    """Parameters violate the non-integrality assumptions."""

    def __init__(self, violations):
        self.violations = list(violations)
        listed = "; ".join(str(v) for v in self.violations)
        super().__init__(f"resonant or invalid parameters: {listed}")


class NumericFailure(MonodromyError):
    """Base class of numeric breakdowns (series or continuation)."""


class NoConvergence(NumericFailure):
    """A series or Taylor expansion did not converge within its term cap."""


class StepUnderflow(NumericFailure):
    """A continuation step became smaller than the precision allows."""
