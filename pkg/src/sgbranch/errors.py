"""Exception hierarchy shared by the library and the command line."""


class SgBranchError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SgBranchError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class ResolutionError(SgBranchError, ValueError):
    """The spatial grid is too coarse for the requested wavepacket."""


class BoundaryError(SgBranchError, RuntimeError):
    """The wavepacket would come too close to the edge of the periodic grid."""


class CapacityError(SgBranchError, ValueError):
    """Explicit history enumeration was requested beyond its size bound."""


class UnsupportedModeError(SgBranchError, ValueError):
    """The operation is not defined for the requested branching mode."""


class SelfCheckError(SgBranchError, RuntimeError):
    """A numerically extracted quantity disagrees with its analytic value."""
