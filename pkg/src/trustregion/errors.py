"""Exception types shared across the solvers."""


class InputError(ValueError):
    """Invalid argument: out-of-domain belief, malformed matrix, bad bounds."""


class PreconditionError(InputError):
    """An operation was called on inputs that violate its stated precondition."""


class GenericityError(InputError):
    """A binary-action distribution violates the genericity assumption
    (L > 0, G > 0, no mass at v = 0)."""


class SolverError(RuntimeError):
    """A numerical routine failed to converge within its budget.

    ``residuals`` carries the last iterate's residuals when available.
    """

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals
