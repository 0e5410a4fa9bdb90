"""Exception types raised across the package.

Every error carries its class name as the identifier reported by the CLI,
so the names below are part of the public surface.
"""


class BorrowError(Exception):
    """Base class for all numeric failures raised by histborrow."""


class AllMassZero(BorrowError):
    pass


class NonFiniteGrid(BorrowError):
    pass


class GridMismatch(BorrowError):
    pass


class AlphaSingular(BorrowError):
    pass


class SupportViolation(BorrowError):
    pass


class GeometricLimitUnsupported(BorrowError):
    pass


class DomainError(BorrowError):
    pass


class SimplexViolation(BorrowError):
    pass


class UnsupportedDimension(BorrowError):
    pass


class SearchDomainTooNarrow(BorrowError):
    pass


class NonPositiveDensity(BorrowError):
    pass


class DegenerateDensity(BorrowError):
    pass


class NoTransition(BorrowError):
    pass


class UnsupportedFamily(BorrowError):
    pass


class InitInvalid(BorrowError):
    pass


class LengthMismatch(BorrowError):
    pass


class NoComparablePairs(BorrowError):
    pass


class HistoricalGroupViolation(BorrowError):
    pass
