"""Exception types raised across the package."""


class ClusterSimError(ValueError):
    """Base class for all simulator errors."""


class InvalidArity(ClusterSimError):
    pass


class DimensionMismatch(ClusterSimError):
    pass


class SiteOutOfRange(ClusterSimError):
    pass


class NotUnitary(ClusterSimError):
    pass


class SameSite(ClusterSimError):
    pass


class TooFewSites(ClusterSimError):
    pass


class InvalidPartition(ClusterSimError):
    pass


class VacPopulated(ClusterSimError):
    """The state has left the dual-rail {H, V} subspace at a measured site."""
