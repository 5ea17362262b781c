"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed configuration or operator description."""


class ComputationError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class RangeRefusal(ComputationError):
    """Requested spectral parameter is outside the supported numeric range."""


class StiffFailure(ComputationError):
    """The ODE integrator underflowed its step size."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class AmbiguousLabeling(ComputationError):
    """Two branch assignments have comparable cost."""
