"""Exception types shared across the toolkit."""


class ZeroSumError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ZeroSumError, ValueError):
    """An argument is outside the mathematical/physical domain of an operation."""


class CapacityError(ZeroSumError, ValueError):
    """A codebook request exceeds the number of valid code words available."""


class UnknownCodeWordError(ZeroSumError, KeyError):
    """A received word is not in the codebook (corrupted or out-of-book)."""


class ConfigError(ZeroSumError, ValueError):
    """A scenario, pattern, or netlist configuration is inconsistent."""


class SolverError(ZeroSumError, RuntimeError):
    """The circuit solver failed (singular system, non-convergence, ...)."""


class SingularNetworkError(SolverError):
    """The network matrix is singular, typically due to a floating node."""
