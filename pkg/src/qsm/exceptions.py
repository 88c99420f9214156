"""Error types shared across the toolkit."""


class NonConvergence(RuntimeError):
    """An iterative numerical routine exhausted its budget before reaching tolerance."""


class BracketError(ValueError):
    """A bracketing routine was given an interval that does not bracket the target."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DimensionCap(ValueError):
    """The requested problem size exceeds the supported desk-scale cap."""


class CapExceeded(ValueError):
    """A hard size cap (e.g. dense-determinant order) was exceeded."""
