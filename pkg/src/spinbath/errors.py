"""Exception types shared across the package."""


class SpinBathError(Exception):
    """Base class for all package errors."""


class PreconditionError(SpinBathError, ValueError):
    """An input violates an operation's documented precondition."""


class DimensionError(PreconditionError):
    """Block or matrix shapes do not match."""


class ContractError(PreconditionError):
    """A fast path was asked to handle parameters it does not cover."""


class BranchError(PreconditionError):
    """The Riccati branch functions are undefined (alpha == 0)."""


class CapacityError(SpinBathError):
    """The requested bath is too large for explicit enumeration."""
