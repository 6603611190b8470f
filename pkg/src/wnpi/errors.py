"""Exception types shared across the package.

``PreconditionError`` and its subclasses signal violated mathematical
preconditions (CLI exit code 3); ``SpecFormatError`` signals malformed
input files (CLI exit code 2).
"""


class PreconditionError(ValueError):
    """A mathematical precondition of an operation is violated."""


class GridMismatchError(PreconditionError):
    """Operands live on different time grids."""


class SingularOperatorError(PreconditionError):
    """Operator is singular or too ill-conditioned to invert reliably."""

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class PinningConditionError(PreconditionError):
    """The pinning Gram matrix fails the admissibility condition.

    Admissible means: the real part is positive definite, or the real part
    vanishes while the imaginary part is nonzero.
    """


class CausticError(PreconditionError):
    """Evaluation requested at (or within tolerance of) a caustic time."""


class RouteDisagreementError(RuntimeError):
    """Two supposedly equivalent evaluation routes disagree beyond tolerance."""


class ResourceGuardError(PreconditionError):
    """Dense chaos-tensor limits (order or dimension) exceeded."""


class SpecFormatError(ValueError):
    """A JSON input file does not match the expected schema."""
