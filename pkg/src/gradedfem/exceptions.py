"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes, so new error conditions should
reuse one of the categories below instead of raising bare ValueErrors.
"""


class GradedFemError(Exception):
    """Base class for all package errors."""


class DomainParameterError(GradedFemError):
    """Invalid domain parameter (e.g. opening angle outside (0, 2*pi))."""


class TriangulationError(GradedFemError):
    """Mesh construction or validation failure."""


class GradingError(GradedFemError):
    """Grading transform produced an invalid mesh (inverted element)."""


class ElementError(GradedFemError):
    """Degenerate element encountered during local assembly."""


class DataEvaluationError(GradedFemError):
    """Problem data evaluated to a non-finite value at a quadrature point."""


class SingularPointError(GradedFemError):
    """Evaluation of an unbounded quantity exactly at the singular corner."""


class PreconditionerError(GradedFemError):
    """Non-positive diagonal entry; the system matrix is not assembled right."""


class NotSpdError(GradedFemError):
    """CG breakdown: the matrix is not symmetric positive definite."""


class SolverFailureError(GradedFemError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NewtonFailureError(SolverFailureError):
    """Newton iteration did not converge within the iteration budget."""


class AssumptionViolationError(GradedFemError):
    """Nonlinearity violates monotonicity or d/d' consistency."""


class MeshFormatError(GradedFemError):
    """Mesh file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(GradedFemError):
    """Invalid configuration key or value."""
