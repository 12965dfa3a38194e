"""Exception types shared across the package."""


class SizeCapError(ValueError):
    """Raised when an exhaustive analysis is requested above its size cap."""


class UndefinedPartitionError(ValueError):
    """Raised when a cycle coloring has no path partition (alternating coloring)."""
