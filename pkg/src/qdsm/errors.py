"""Exception hierarchy shared by every stage of the pipeline."""


class QDSMError(Exception):
    """Base class for all package errors."""


class DomainError(QDSMError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """The fundamental solution was evaluated at coincident points."""


class SolverError(QDSMError, RuntimeError):
    """An iterative solve did not reach its tolerance.

    The final relative residual is kept on ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AccuracyError(QDSMError, RuntimeError):
    """A quadrature failed to reach its requested accuracy."""


class ConfigError(QDSMError, ValueError):
    """A run configuration is invalid."""


class StageError(QDSMError):
    """A pipeline stage failed; ``stage`` names it and ``cause`` holds the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
