"""Exception types shared across the package."""


class QembedError(Exception):
    """Base class for all package errors."""


class DomainError(QembedError, ValueError):
    """An argument lies outside the domain of an operation."""


class DimensionError(QembedError, ValueError):
    """Array shapes or component counts do not match."""


class ContractError(QembedError, ValueError):
    """An input violates a documented precondition (not Hermitian, not unitary, ...)."""


class InvalidAutomatonError(QembedError, ValueError):
    """A configuration map is not a bijection."""


class UnsupportedError(QembedError, NotImplementedError):
    """The requested combination of options is not supported."""


class NumericalError(QembedError, ArithmeticError):
    """A numerical procedure became unstable or degenerate."""
