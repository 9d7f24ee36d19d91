"""Exception hierarchy.

Each error carries an ``exit_code`` used by the command line front end:
1 for usage problems, 2 for bad data, 3 for numerical failures.
"""


class MomentSpectraError(Exception):
    exit_code = 3


class DimensionError(MomentSpectraError, ValueError):
    exit_code = 2


class InputError(MomentSpectraError, ValueError):
    exit_code = 2


class NotPSDError(MomentSpectraError, ValueError):
    exit_code = 2


class InvalidMomentError(MomentSpectraError, ValueError):
    exit_code = 2


class CapacityError(MomentSpectraError):
    exit_code = 2


class UnsupportedError(MomentSpectraError):
    exit_code = 2


class ConvergenceError(MomentSpectraError, ArithmeticError):
    """Iterative solver stopped without meeting its tolerance."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class DegenerateMeasureError(MomentSpectraError, ArithmeticError):
    """The measure is (numerically) the point mass at the origin."""


class InconsistentInputsError(MomentSpectraError, ArithmeticError):
    """An operator and a second moment that cannot come from one measure."""
