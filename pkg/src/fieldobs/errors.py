"""Exception types shared across the package."""


class FieldObsError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FieldObsError):
    """Invalid configuration value, unparseable config file, or bad constructor input."""


class DimensionError(FieldObsError):
    """Array shape inconsistent with the grid or with a peer array."""


class DomainError(FieldObsError):
    """Argument outside its mathematical domain."""


class NumericError(FieldObsError):
    """A numerical procedure failed to converge or produced non-finite values."""


class StiffnessError(NumericError):
    """Adaptive stepping was driven to the minimum step size and still rejected."""
