"""Exception hierarchy.

The CLI maps :class:`DataError` to exit code 2 and every other
:class:`SpherePathError` to exit code 3.
"""

import math


class SpherePathError(Exception):
    """Base class for all package errors."""


class DataError(SpherePathError, ValueError):
    """Malformed or non-finite input data."""


class InvalidDimensionError(SpherePathError, ValueError):
    pass


class SampleTooSmallError(SpherePathError, ValueError):
    pass


class DegenerateInputError(SpherePathError, ValueError):
    """A kernel is undefined for the given input (e.g. cosine of a zero vector)."""


class EnumerationCapError(SpherePathError, ValueError):
    """Exhaustive path search was requested for too many observations."""

    def __init__(self, n, cap):
        self.n = n
        self.cap = cap
        self.required = distinct_path_count(n)
        super().__init__(
            f"exact path search needs n <= {cap}, got n = {n} "
            f"({self.required} distinct covering paths)"
        )


class InvariantViolationError(SpherePathError):
    pass


class ScoreSymmetryError(SpherePathError, ValueError):
    pass


class ResolutionError(SpherePathError, ValueError):
    """Exact convolution grid would exceed the memory budget."""


def distinct_path_count(n):
    """Number of covering paths once a path and its reversal are identified."""
    if n < 1:
        return 0
    if n == 1:
        return 2
    return 2 ** (n - 1) * math.factorial(n)
