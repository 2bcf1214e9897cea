class SternGerlachError(Exception):
    """Base class for all errors raised by this package."""


class GridError(SternGerlachError, ValueError):
    pass


class GridTooCoarse(GridError):
    pass


class GridTooNarrow(GridError):
    pass


class GridMismatch(GridError):
    pass


class BoundaryMassError(SternGerlachError):
    """Probability reached the periodic boundary; the run is no longer trustworthy."""


class EmptyBranch(SternGerlachError, ValueError):
    pass


class UndefinedAtZeroMean(SternGerlachError, ValueError):
    pass


class ConfigError(SternGerlachError, ValueError):
    pass
