"""Exception types shared across the library."""


class OrderError(ValueError):
    """A chaos/Hermite order is outside the supported range."""


class CapacityError(ValueError):
    """A request exceeds a documented size cap (enumeration, MC budget, ...)."""


class UnfittableLossError(ValueError):
    """The loss cannot be used for training (non-convex or evaluation-only)."""


class ConfigError(ValueError):
    """An experiment configuration is malformed.  Maps to CLI exit code 2."""
