"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems exit 2, solver
nonconvergence exits 3, mathematical failures (witnesses, infeasibility)
exit 1.
"""


class InputError(ValueError):
    """Malformed or invalid input (bad field, negative weight, shape mismatch)."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class DegenerateError(ValueError):
    """A degenerate configuration that the operation cannot handle."""


class SaturationError(ValueError):
    """A weighted point admits no tuple with positive kernel."""


class ConvergenceError(RuntimeError):
    """Iterative solver stopped without meeting its tolerance.

    ``lower`` and ``upper`` carry the best bound pair found.
    """

    def __init__(self, message, lower=None, upper=None):
        self.lower = lower
        self.upper = upper
        super().__init__(f"{message} (bounds: {lower!r}, {upper!r})")


class AuditError(AssertionError):
    """An invariant that must hold by construction was found violated."""
