"""Shared exception types."""


class ResourceLimitError(RuntimeError):
    """A configured depth / fuel / node budget was exceeded."""


class InvalidTriangleError(ValueError):
    """Slopes that were expected to form a Farey triangle do not."""


class OracleUnavailableError(RuntimeError):
    """The explicit-matrix normal form broke down; callers should skip, not fail."""


class SingularTermError(ValueError):
    """A series term hit a pole; carries the offending slope."""

    def __init__(self, slope, message="series term is singular"):
        super().__init__(f"{message} at slope {slope}")
        self.slope = slope


class PreconditionError(ValueError):
    """An operation's documented precondition does not hold."""
