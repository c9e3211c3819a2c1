"""Exception hierarchy shared by all engines."""


class CavityForceError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CavityForceError, ValueError):
    """A schedule or argument left its physical domain (e.g. L(t) <= 0)."""


class TruncationError(CavityForceError):
    """A truncated series or basis did not reach the requested tolerance."""


class NumericError(CavityForceError):
    """Quadrature, series or time stepping failed to converge."""


class RootSearchError(NumericError):
    """No sign change was found where an eigenvalue root was expected."""


class ConsistencyError(CavityForceError):
    """Two routes to the same quantity disagree beyond tolerance."""


class ConfigError(CavityForceError, ValueError):
    """A scenario configuration failed validation."""
