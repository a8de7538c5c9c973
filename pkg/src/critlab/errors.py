"""Exception hierarchy shared by all critlab modules."""


class CritlabError(Exception):
    """Base class for every error raised by critlab."""


class MalformedMetricError(CritlabError, ValueError):
    """Metric data is non-finite, mis-shaped or violates positivity."""


class InconsistentMetricError(CritlabError):
    """Pointwise scalar curvature is not constant across the grid."""


class GridMismatchError(CritlabError, ValueError):
    """A profile and a metric are sampled on different grids."""


class DegenerateBoundaryError(CritlabError):
    """The potential has (numerically) vanishing gradient on a boundary sphere."""


class ConstructionError(CritlabError):
    """A requested critical metric could not be built."""


class UnsupportedDomainError(ConstructionError):
    pass


class DomainError(ConstructionError):
    pass


class NoPositiveSolutionError(ConstructionError):
    pass


class NotCriticalError(ConstructionError):
    """The overdetermined system is violated beyond tolerance."""


class LevelSetError(CritlabError):
    pass


class InconclusiveError(CritlabError):
    """A check cannot be decided, e.g. a degenerate maximum."""


class InvariantViolationError(CritlabError):
    """Input cannot be a critical metric (e.g. a nonpositive bound denominator)."""
