"""Exception types shared across the package."""


class RepintError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(RepintError):
    """Operands have incompatible shapes or declared dimensions."""


class ValidationError(RepintError):
    """A value violates one of its structural invariants (hermiticity, trace, ...)."""


class ConfigError(RepintError):
    """Malformed run configuration or input file."""


class NumericalError(RepintError):
    """A numerical routine failed (non-convergence, singular input, ...)."""


class MaxIterationsExceeded(NumericalError):
    """Fixed-point iteration hit its iteration cap.

    Carries the best iterate seen so far and its residual; a non-simple
    peripheral spectrum is one possible cause.
    """

    def __init__(self, message, best_state=None, residual=None, iterations=None):
        super().__init__(message)
        self.best_state = best_state
        self.residual = residual
        self.iterations = iterations


class OperatorCountError(RepintError):
    """A Kraus composition would exceed the configured operator cap."""


class DriftError(RepintError):
    """Accumulated numerical drift of a running state exceeded its guard threshold."""
