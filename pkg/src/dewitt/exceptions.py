"""Exception types raised by :mod:`dewitt`."""


class DewittError(Exception):
    """Base class for all package errors."""


class NotSymmetricError(DewittError, ValueError):
    """Input matrix deviates from symmetry beyond the tolerated roundoff."""


class NotPositiveDefiniteError(DewittError, ValueError):
    """Input matrix is not symmetric positive definite."""


class DimensionMismatchError(DewittError, ValueError):
    """Operands have incompatible matrix dimensions."""


class DomainError(DewittError, ValueError):
    """A point lies outside the domain of a map or of a geodesic.

    ``index`` is the flat batch index of the first offending entry (or ``None``
    for unbatched input) and ``predicate`` names the violated condition.
    """

    def __init__(self, message, index=None, predicate=None):
        super().__init__(message)
        self.index = index
        self.predicate = predicate


class FieldPointError(DewittError, ValueError):
    """A pointwise operation failed at a named base point of a field."""

    def __init__(self, point_id, cause):
        predicate = getattr(cause, "predicate", None)
        msg = f"point {point_id!r}: {cause}"
        super().__init__(msg)
        self.point_id = point_id
        self.cause = cause
        self.predicate = predicate


class NonlinearMapError(DewittError, ValueError):
    """A map handed to a trace routine failed the linearity probe."""


class IntegrationError(DewittError, RuntimeError):
    """Positive definiteness was lost during ODE integration."""


class DocumentError(DewittError, ValueError):
    """A field document is malformed.

    ``location`` is a JSON-path-like string (``points[2].matrix``) or a
    ``line:column`` pair for syntax errors.
    """

    def __init__(self, message, location=None, source=None):
        where = f"{source}: " if source else ""
        at = f" at {location}" if location else ""
        super().__init__(f"{where}{message}{at}")
        self.location = location
        self.source = source
