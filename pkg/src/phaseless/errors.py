"""Exception hierarchy shared by the library and the CLI."""


class PhaselessError(Exception):
    """Base class for all errors raised by :mod:`phaseless`."""


class ZeroAnchor(PhaselessError):
    """The anchor vector of a frame is zero, so no canonical transform exists."""


class AmbiguousCollinear(PhaselessError):
    """Trilateration anchors are collinear; the mirror image is an equally valid answer."""


class Inconsistent(PhaselessError):
    """The three circles of a trilateration problem do not meet in a point."""


class Infeasible(PhaselessError):
    """Magnitudes cannot be produced by any vector / signal of the model."""

    def __init__(self, message, point=None, residual=None):
        super().__init__(message)
        self.point = point
        self.residual = residual


class NotCollinear(PhaselessError):
    """An ambiguity pair was requested for a frame that does phase retrieval."""


class Ambiguous(PhaselessError):
    """The reconstruction system has a nullspace of dimension larger than one."""

    def __init__(self, message, nullspace_gap=None):
        super().__init__(message)
        self.nullspace_gap = nullspace_gap


class RealityViolated(PhaselessError):
    """Real-mode data are not consistent with a real-valued signal."""


class SizingError(PhaselessError):
    """Too few sample points for the requested degree bound."""


class FrameError(PhaselessError):
    """The window family does not do phase retrieval in C^2."""


class GridTooCoarse(PhaselessError):
    """The quadrature self-check between two node counts disagrees."""
