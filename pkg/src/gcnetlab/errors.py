"""Exception types shared across the package."""


class GCNetError(Exception):
    """Base class for package errors."""


class NonFiniteError(GCNetError):
    """A NaN or infinity appeared where finite values are required."""


class GimbalLockError(GCNetError):
    """Euler-rate matrix is singular (pitch at +-90 degrees)."""


class SingularStateError(GCNetError):
    """State reached a dynamics singularity (r = 0 or m <= 0)."""


class ConvergenceError(GCNetError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message, best_residual=None, stage=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.stage = stage


class ConfigError(GCNetError):
    """Invalid or inconsistent configuration input."""


class DatasetError(GCNetError):
    """Base class for dataset container problems."""


class CorruptHeaderError(DatasetError):
    """Container header is malformed (bad magic or version)."""


class TruncatedDataError(DatasetError):
    """Container ends before the header-declared payload."""


class DimensionMismatchError(DatasetError):
    """Container dimensions disagree with the declared problem."""


class ProblemMismatchError(DatasetError):
    """Container holds a different problem than requested."""
