"""Exception types shared across the package."""


class CountregError(Exception):
    """Base class for all countreg errors."""


class ConfigError(CountregError):
    """Invalid encoding configuration, simulation design, or run configuration."""


class DataError(CountregError):
    """Invalid or unparsable input data.

    Carries 1-based data-row and column coordinates when they are known.
    """

    def __init__(self, message, row=None, column=None):
        if row is not None and column is not None:
            message = f"{message} (row {row}, column {column!r})"
        elif row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row
        self.column = column


class SeparationError(CountregError):
    """The binary hurdle part is perfectly separated; names the offending column."""

    def __init__(self, column):
        super().__init__(
            f"perfect separation detected in the hurdle equation: column {column!r} "
            "separates zero from positive counts; the coefficient diverges"
        )
        self.column = column
