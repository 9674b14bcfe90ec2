class RiemmaxError(Exception):
    """Base class for all library errors."""


class DomainError(RiemmaxError, ValueError):
    """An argument lies outside the domain of a formula."""


class ConstraintViolation(RiemmaxError, ValueError):
    """A point or vector violates its manifold membership constraint."""


class PreconditionError(RiemmaxError):
    """A solver hypothesis does not hold for the given problem."""


class UnsupportedStructureError(RiemmaxError):
    """The requested operation needs structure the problem does not provide."""


class SubsolverError(RiemmaxError):
    """An inner solve did not meet its accuracy contract."""


class ConfigError(RiemmaxError):
    """Invalid experiment configuration."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
