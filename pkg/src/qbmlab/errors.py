"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an operation is called outside its domain of validity
    (non-positive parameter, divergent integral, mismatched grids, ...)."""


class PreconditionError(RuntimeError):
    """Raised when a numerical precondition (stability bound, convergence
    bound, boundary-mass condition) is violated at run time."""
