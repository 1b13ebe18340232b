"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 1,
budget refusals with 2 and numerical failures with 3.
"""


class ValidationError(ValueError):
    """Malformed input: bad word, bad pattern file, inconsistent arguments."""


class PatternSyntaxError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class BudgetExceededError(RuntimeError):
    """A request would enumerate or allocate more than the configured cap."""


class NumericalError(RuntimeError):
    """A numerical routine failed (eigensolver, non-finite result)."""
