"""Exception hierarchy.

Every domain failure raises a subclass of :class:`TorusLiftError`, so callers
(and the CLI runner) can convert any expected failure into a per-task error
record without catching bare ``Exception``.
"""


class TorusLiftError(Exception):
    """Base class for all library errors."""


class SingularModulus(TorusLiftError):
    """A matrix that must be invertible for the construction is singular."""


class DualityAssumptionViolated(TorusLiftError):
    """The B-field twisted duality map is not defined for this torus."""


class NotSplit(TorusLiftError):
    """Operation requires a torus presented in split (period-matrix) form."""


class InadmissibleD(TorusLiftError):
    """Integer matrix D fails the admissibility conditions for graph branes."""


class InadmissibleSpec(TorusLiftError):
    """Theta-sum data (modulus / D / characteristic) is not admissible."""


class InvalidXi(TorusLiftError):
    """A sign datum violates the required parity/cocycle rules."""


class InvalidBrane(TorusLiftError):
    """Brane data is structurally invalid (support, offset, connection)."""


class NotPositiveDefinite(TorusLiftError):
    """A quadratic form that must be positive definite is not."""


class NonTransversal(TorusLiftError):
    """Two branes do not intersect transversally."""


class UnsupportedTriple(TorusLiftError):
    """Floer product requested for a brane triple outside the supported set."""


class JNotPreserving(TorusLiftError):
    """The complex structure does not preserve a tangent space it should."""


class TruncationBudgetExceeded(TorusLiftError):
    """No certified truncation radius exists within the configured cap."""


class ParseError(TorusLiftError):
    """Config text could not be parsed; carries line/column information."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(TorusLiftError):
    """Config parsed but is semantically inconsistent."""
