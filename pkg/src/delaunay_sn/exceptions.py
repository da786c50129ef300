"""Exception hierarchy for delaunay_sn."""


class DelaunayError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DelaunayError, ValueError):
    """A pointwise formula was evaluated where it is undefined (D <= 0, Theta = 0)."""


class NoAdmissibleInterval(DelaunayError, ValueError):
    """The parameters admit no s-interval with L > |R|."""


class OutOfBand(DelaunayError, ValueError):
    """C lies outside the band [-C_{-h}, C_h]."""


class NonConvergent(DelaunayError, ArithmeticError):
    """A quadrature or root solve did not reach its tolerance."""


class UnsupportedType(DelaunayError, ValueError):
    """The requested operation is not defined for this Delaunay type."""


class UnsupportedFormat(DelaunayError, ValueError):
    pass


class NotClosed(DelaunayError, ValueError):
    """A closed curve was required but the endpoint gap is too large."""


class PoleCollision(DelaunayError, ValueError):
    """A mesh vertex coincides with the stereographic projection pole."""


class StencilTooWide(DelaunayError, ValueError):
    pass


class TargetOutOfRange(DelaunayError, ValueError):
    """The requested width lies outside the open range of W(h, .)."""
