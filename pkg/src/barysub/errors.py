"""Exceptions raised by the geometry and analysis routines."""


class BarySubError(Exception):
    """Base class for all package errors."""


class CutLocusError(BarySubError, ValueError):
    """A log or distance derivative was requested at a cut point."""


class FocalPointError(BarySubError, ValueError):
    """The query has no unique closest point on the subspace.

    ``index`` is set when the offending point is part of a dataset.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ZeroMassError(BarySubError, ValueError):
    """Barycentric weights sum to zero, so they cannot be normalized."""


class NotOnEBSError(BarySubError, ValueError):
    pass


class DegenerateHessianError(BarySubError, ValueError):
    pass


class DomainViolationError(BarySubError, ValueError):
    """Reference points violate the regular-geodesic-ball condition."""


class NonConvergenceError(BarySubError, RuntimeError):
    pass


class DependentPointsError(BarySubError, ValueError):
    """Reference points are affinely dependent."""


class InsufficientDataError(BarySubError, ValueError):
    pass


class NoIndependentTupleError(BarySubError, ValueError):
    pass


class ValidationError(BarySubError, ValueError):
    """Malformed or off-manifold input file."""


class ReferenceCoincidenceError(BarySubError, ValueError):
    """The p-variance gradient is singular at a reference point for p < 2."""
