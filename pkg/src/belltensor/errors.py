"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ParameterError -> 2, CapacityError -> 3,
everything else that signals a failed check -> 1.
"""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class CapacityError(ValueError):
    """The request exceeds a hard size cap (dense storage, enumeration)."""


class NumericalIntegrityError(ArithmeticError):
    """A quantity that must be real/consistent came out numerically broken."""


class PostselectionError(ValueError):
    """Conditioning on an outcome of (numerically) zero probability."""


class BisectionError(RuntimeError):
    """Threshold bisection could not bracket a sign change."""
