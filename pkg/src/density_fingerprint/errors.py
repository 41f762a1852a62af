"""Exception hierarchy.

Validation problems derive from :class:`ValueError`, numerical trouble from
:class:`ArithmeticError`, so callers can catch broadly or narrowly.
"""

from __future__ import annotations


class FingerprintError(Exception):
    """Base class for all errors raised by this package."""


class SingularBasis(FingerprintError, ValueError):
    pass


class DuplicateMotifPoint(FingerprintError, ValueError):
    def __init__(self, i: int, j: int, distance: float):
        super().__init__(
            f"motif points {i} and {j} coincide (torus distance {distance:.3g})"
        )
        self.indices = (i, j)
        self.distance = distance


class ParseError(FingerprintError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DegenerateArrangement(FingerprintError, ArithmeticError):
    """Bisector arrangement could not be resolved at the working tolerance."""


class NonFiniteCell(FingerprintError, ValueError):
    pass


class ConsistencyError(FingerprintError, ArithmeticError):
    """Computed densities violate monotonicity or tiling beyond tolerance."""


class GridMismatch(FingerprintError, ValueError):
    pass


class ComparisonPreconditionError(FingerprintError, ValueError):
    """Two periodic sets cannot be compared by bottleneck distance."""


class NoCommonLattice(ComparisonPreconditionError):
    pass


class MotifCardinalityMismatch(ComparisonPreconditionError):
    pass


class DeltaTooLarge(FingerprintError, ValueError):
    pass
