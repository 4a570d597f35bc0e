"""Exception hierarchy shared across the package."""


class TVSSVError(Exception):
    """Base class for all package errors."""


class DomainError(TVSSVError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(TVSSVError):
    """Missing or invalid configuration."""


class DataError(TVSSVError):
    """Input data cannot be parsed, aligned or transformed."""


class NumericalError(TVSSVError):
    """A numerical failure inside estimation (non-PD matrices, overflow)."""


class ParticleCollapseError(NumericalError):
    """Every particle weight vanished at some time step."""

    def __init__(self, t: int, message: str = "particle collapse"):
        super().__init__(f"{message} at t={t}")
        self.t = t
