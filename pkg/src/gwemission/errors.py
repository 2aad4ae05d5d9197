"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """A quadrature did not reach its tolerance within the refinement budget."""

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


class EstimationError(RuntimeError):
    """The counting model carries no information about the amplitude."""


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class PerturbativityWarning(UserWarning):
    """A parameter sits outside the regime where first-order results hold."""
