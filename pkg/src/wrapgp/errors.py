"""Exception types raised across the package."""


class WrapGPError(Exception):
    """Base class for package errors."""


class DomainError(WrapGPError, ValueError):
    """An argument lies outside the domain of the operation."""


class UndefinedDirectionError(WrapGPError, ValueError):
    """A mean direction was requested for a zero resultant."""


class InsufficientDataError(WrapGPError, ValueError):
    pass


class ConfigurationError(WrapGPError, ValueError):
    """Invalid priors, sampler settings or run configuration."""


class SingularCovarianceError(WrapGPError, ValueError):
    """Cholesky factorisation of a covariance matrix failed.

    ``min_separation`` carries the smallest pairwise site distance (km) when
    it is known, which is usually the culprit.
    """

    def __init__(self, message, min_separation=None):
        super().__init__(message)
        self.min_separation = min_separation


class InputConsistencyError(WrapGPError):
    """A chain file does not belong to the data or config it is used with."""
