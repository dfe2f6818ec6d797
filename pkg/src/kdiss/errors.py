"""Exception types shared across the package."""


class KdissError(Exception):
    """Base class for all kdiss errors."""


class DomainError(KdissError):
    """A numeric input is outside the domain an operation accepts."""


class SchemaError(KdissError):
    """Objects or tables do not share the structure an operation requires."""


class DegenerateSymmetryError(KdissError):
    """A matrix is too symmetric to split: the decisive entries are tied."""


class NonPolarizedError(KdissError):
    """Iterative averaging did not separate the objects into two groups."""


class NotSwitchedError(KdissError):
    """The probe weight hit its cap before the clone regrouped with the target."""


class StoreLookupError(KdissError, KeyError):
    """An increment-store key (query, target, delta, parameter) is absent."""
