"""Exception hierarchy shared across the package."""


class MtbbmError(Exception):
    """Base class for all package errors."""


class ModelError(MtbbmError, ValueError):
    """Structurally malformed model data (bad probabilities, shapes, rates)."""


class DomainError(MtbbmError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(MtbbmError, RuntimeError):
    """An iterative numerical method failed to converge."""


class ResourceLimitError(MtbbmError, RuntimeError):
    """A configured resource cap (e.g. population size) was exceeded."""


class InsufficientSamplesError(MtbbmError, RuntimeError):
    """A conditional estimator retained fewer samples than required."""


class DomainTooSmallError(MtbbmError, RuntimeError):
    """The computational domain is too small for the requested quantity."""


class StabilityError(MtbbmError, RuntimeError):
    """The time stepper produced NaN/Inf values."""
