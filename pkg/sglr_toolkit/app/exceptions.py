"""Custom exceptions for the sglr toolkit
"""

class SglrToolkitError(Exception):
    """Base exception all toolkit exceptions inherit from
    """


class DomainError(SglrToolkitError, ValueError):
    """Raised when a mean or natural parameter lies outside the domain of a family
    """


class NoSolutionError(SglrToolkitError):
    """Raised when a divergence equation has no solution on the requested side,
    because the target exceeds the divergence limit at the endpoint of the mean domain
    """


class InvalidHypothesesError(SglrToolkitError, ValueError):
    """Raised when the alternative boundary mu1 lies below the null mu0
    """


class DegenerateBoundError(SglrToolkitError):
    """Raised when a constant boundary crossing bound is vacuous, which happens
    when mu1 equals mu0. Callers should switch to a log-log boundary
    """


class NonSummableError(SglrToolkitError):
    """Raised when the stitched series of a boundary does not decay by k_max
    """


class InvalidBoundaryError(SglrToolkitError, ValueError):
    """Raised when a boundary is negative, decreasing or g(n)/n is not nonincreasing
    """


class ObservationOutOfSupportError(SglrToolkitError, ValueError):
    """Raised when an observation fed to a test falls outside the closure of the mean domain
    """


class UnsupportedFamilyError(SglrToolkitError):
    """Raised when an operation is only defined for a subset of the families
    """


class NoFiniteSizeError(SglrToolkitError):
    """Raised when no finite sample size reaches the requested power
    """


class GridExhaustedError(SglrToolkitError):
    """Raised when no threshold on the calibration grid meets the target level
    """


class CalibrationError(SglrToolkitError):
    """Raised when a Monte Carlo calibration disagrees with its closed-form bound
    """


class GridSearchRequired(SglrToolkitError):
    """Signals that the membership set of a confidence sequence is not known to be
    an interval so binary search can't be used and a grid scan is needed
    """


class OverlapError(SglrToolkitError, ValueError):
    """Raised when the target intervals of a multi-interval confidence sequence overlap
    """


class BudgetExceededError(SglrToolkitError):
    """Raised when the per-interval crossing bounds sum to more than alpha
    """


class ExperimentConfigError(SglrToolkitError):
    """Raised when a harness scenario config is invalid
    """


class PropertyCheckError(SglrToolkitError):
    """Raised when one or more checks of the property suite fail
    """
