"""Exception types raised across the package.

Every validation failure gets its own class so callers can catch precise
conditions; all of them descend from :class:`KmaxError` and from the
builtin exception that idiomatic Python code would expect (``ValueError``
for bad values, ``IndexError`` for bad indices, ``OSError`` for I/O).
"""


class KmaxError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(KmaxError, ValueError):
    """Base class for input-validation failures."""


# dataset construction

class EmptyGroupError(ValidationError):
    """A group size is zero (or negative)."""


class TooFewGroupsError(ValidationError):
    """Fewer than two groups."""


class DimensionMismatchError(ValidationError):
    """Observations do not share a common dimension, or sizes disagree
    with the number of observations."""


class DiscreteOutOfRangeError(ValidationError):
    """A discrete observation falls outside {1, ..., m}."""


# kernels

class DomainMismatchError(ValidationError):
    """Kernel family incompatible with the dataset domain."""


class AllPointsIdenticalError(ValidationError):
    """Median pairwise squared distance is zero, so the median-heuristic
    bandwidth would be invalid."""


class IndexOutOfRangeError(KmaxError, IndexError):
    """An observation index is outside [0, N)."""


# statistics

class SameGroupError(ValidationError):
    """A pairwise operation was asked to compare a group with itself."""


# permutation

class EnumerationTooLargeError(ValidationError):
    """The number of distinct group assignments exceeds the exact-
    enumeration cap."""


# concentration bounds

class SingletonDatasetError(ValidationError):
    """Fewer than two pooled observations."""


class UnbalancedGroupsError(ValidationError):
    """A bound valid only for balanced two-sample designs was requested
    for something else."""


class ZeroVarianceError(ValidationError):
    """A variance proxy is zero (or negative), so the bound is undefined."""


class MissingBoundError(ValidationError):
    """No uniform kernel bound B was supplied where one is required."""


# asymptotics

class AllZeroError(ValidationError):
    """Every eigenvalue is zero; the spectrum is degenerate."""


class NonpositiveVarianceError(ValidationError):
    """A covariance diagonal entry is not strictly positive."""


class InvalidSimplexError(ValidationError):
    """A probability vector has nonpositive entries or does not sum to 1."""


class KTooSmallError(ValidationError):
    """The Gumbel approximation needs K >= 3 (log log K must be positive)."""


class UnbalancedDesignError(ValidationError):
    """The Gumbel approximation needs equal group sizes."""


# baselines

class ZeroWithinDispersionError(ValidationError):
    """All points within every group are identical, so the within-group
    dispersion is zero and the ratio is undefined."""


class TooFewPointsError(ValidationError):
    """Not enough pooled points for the requested statistic (N must
    exceed K)."""


# simulation

class DegenerateSupportError(ValidationError):
    """Truncation interval is empty or carries (numerically) no mass."""


class UnknownScenarioError(ValidationError):
    """Scenario name not recognized."""


# io / cli

class MissingGroupColumnError(ValidationError):
    """The CSV header has no `group` column."""


class MalformedRowError(ValidationError):
    """A CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MixedDomainError(ValidationError):
    """A `level` column appears alongside feature columns."""


class IoError(KmaxError, OSError):
    """Report could not be written."""


__all__ = [
    "KmaxError",
    "ValidationError",
    "EmptyGroupError",
    "TooFewGroupsError",
    "DimensionMismatchError",
    "DiscreteOutOfRangeError",
    "DomainMismatchError",
    "AllPointsIdenticalError",
    "IndexOutOfRangeError",
    "SameGroupError",
    "EnumerationTooLargeError",
    "SingletonDatasetError",
    "UnbalancedGroupsError",
    "ZeroVarianceError",
    "MissingBoundError",
    "AllZeroError",
    "NonpositiveVarianceError",
    "InvalidSimplexError",
    "KTooSmallError",
    "UnbalancedDesignError",
    "ZeroWithinDispersionError",
    "TooFewPointsError",
    "DegenerateSupportError",
    "UnknownScenarioError",
    "MissingGroupColumnError",
    "MalformedRowError",
    "MixedDomainError",
    "IoError",
]
