"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so solver code should raise
the most specific class that applies rather than a bare RuntimeError.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class CapacityError(RuntimeError):
    """Requested problem size exceeds the configured memory/subspace budget."""


class ConvergenceError(RuntimeError):
    """An iterative solver or propagator failed to reach its tolerance."""


class ResolutionError(RuntimeError):
    """Sampled data is too sparse for the requested quadrature accuracy."""
