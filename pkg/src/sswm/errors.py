"""Exception types shared across the package."""


class SswmError(Exception):
    """Base class for all package errors."""


class ConfigError(SswmError):
    """Scenario/config file cannot be parsed or references unknown keys."""


class ValidationError(SswmError):
    """Inputs violate a documented precondition (bad grid size, OD=0, ...)."""


class SingularPointError(SswmError):
    """Evaluation requested at (or numerically on top of) a pole."""


class OverdampedError(SswmError):
    """Time-domain closed forms are disabled when a Rabi arm is overdamped."""


class InsufficientExtremaError(SswmError):
    """A fit needs more local maxima than the trace provides."""


class ZeroMassError(SswmError):
    """A normalized functional received a grid with zero total mass."""
