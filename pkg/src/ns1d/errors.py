"""Exception hierarchy shared across the package."""


class Ns1dError(Exception):
    """Base class for all package errors."""


class DomainError(Ns1dError, ValueError):
    """An input lies outside the physical domain (e.g. v <= 0, theta <= 0)."""


class ArgumentError(Ns1dError, ValueError):
    """A structural precondition on arguments was violated."""


class QuadratureError(Ns1dError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class PositivityError(Ns1dError):
    """A candidate state contains nonpositive v or theta."""


class PositivityExhaustedError(PositivityError):
    """Step rejection halved dt the maximum number of times without success."""


class NewtonDivergenceError(Ns1dError):
    """Newton iteration failed to reduce the residual below tolerance."""


class ConfigError(Ns1dError, ValueError):
    """Configuration file is malformed or violates an invariant."""
