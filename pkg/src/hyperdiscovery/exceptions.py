"""Exception types shared across the package."""


class HyperdiscoveryError(Exception):
    """Base class for all package-specific errors."""


class DomainError(HyperdiscoveryError, ValueError):
    """A kinematic or numeric input lies outside its admissible domain."""


class ParameterError(HyperdiscoveryError, ValueError):
    """A model parameter violates its sign or structural constraints."""


class FeasibilityError(HyperdiscoveryError, ValueError):
    """A logarithmic term is evaluated at or beyond its singularity.

    Raised when ``1 - a * (I - 3)^p <= 0`` for some log-activated term, or
    when a requested evaluation range would cross that bound.
    """

    def __init__(self, message: str, term_index: int | None = None,
                 point_index: int | None = None):
        super().__init__(message)
        self.term_index = term_index
        self.point_index = point_index


class DataError(HyperdiscoveryError, ValueError):
    """A dataset file or in-memory dataset violates the data contract."""


class DegenerateDataError(HyperdiscoveryError, ValueError):
    """A loss or score is undefined for the given observations.

    Covers both an all-excluded percentage loss (every observed stress below
    the denominator floor) and a coefficient of determination over a constant
    observation series.
    """


class FitError(HyperdiscoveryError, RuntimeError):
    """Every restart of an optimisation failed to produce a usable result."""


class DiscoveryError(FitError):
    """No candidate subset could be fitted during a model search."""
