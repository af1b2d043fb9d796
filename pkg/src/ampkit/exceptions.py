"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class UnsupportedPriorError(InvalidArgumentError):
    """The requested operation has no implementation for this prior."""


class DegenerateDenoiserError(ArithmeticError):
    """The divergence-free wrapper is singular (tau2 <= posterior variance)."""


class DegenerateSampleError(InvalidArgumentError):
    """A statistical test received a sample with zero spread."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""
