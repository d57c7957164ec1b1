"""Exception types shared across the package.

The CLI maps ``ValidationError`` to exit code 2 and ``NumericalError`` to
exit code 3.
"""


class ValidationError(ValueError):
    """Input data or configuration violates a documented precondition."""


class NumericalError(ArithmeticError):
    """A computation diverged or failed to converge."""
