"""Exception hierarchy.

Everything derives from :class:`ZonefitError`. Errors caused by bad user input
(files, configs, parameters) also derive from :class:`InputError`, which the
CLI maps to exit code 2.
"""

from __future__ import annotations


class ZonefitError(Exception):
    pass


class InputError(ZonefitError, ValueError):
    pass


# -- data ------------------------------------------------------------------


class EmptyFileError(InputError):
    pass


class MissingColumnError(InputError):
    def __init__(self, column: str):
        super().__init__(f"missing column: {column}")
        self.column = column


class ParseError(InputError):
    def __init__(self, row: int, column: str, message: str):
        super().__init__(f"row {row}, column {column!r}: {message}")
        self.row = row
        self.column = column
        self.message = message


# -- zone model --------------------------------------------------------------


class InvalidParamsError(InputError):
    pass


class EmptyContourError(ZonefitError):
    pass


class InvalidExtentError(InputError):
    pass


class GridMismatchError(InputError):
    pass


# -- fitting -----------------------------------------------------------------


class NoCalledPitchesError(InputError):
    pass


class TooFewPitchesError(InputError):
    pass


class PerfectSeparationError(InputError):
    """Only one call class is present, so the boundary is not identifiable."""


class PerfectSeparationWarning(UserWarning):
    """The fitted boundary separates the calls perfectly and β sits at its cap."""


class BootstrapError(ZonefitError):
    pass


# -- analysis ----------------------------------------------------------------


class InvalidCountsError(InputError):
    pass


class EmptyCellError(ZonefitError):
    pass
