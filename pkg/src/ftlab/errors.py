"""Exception types shared across the package."""


class UsageError(ValueError):
    """An operation was called with arguments outside its contract."""


class UnsupportedPropagationError(UsageError):
    """An error would have to be pushed through a gate outside the normalizer group."""


class UnsupportedNetworkError(UsageError):
    """The dense oracle was handed a network it cannot simulate."""


class OracleSizeError(UnsupportedNetworkError):
    """Network exceeds the dense oracle's qubit cap."""


class OrderingError(RuntimeError):
    """Gate failure was evaluated before the status of a following gate was known."""


class InfeasibleError(ValueError):
    """Concatenation parameters for which the recursion does not converge."""
