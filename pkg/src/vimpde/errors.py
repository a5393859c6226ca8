"""Exception hierarchy shared by all modules."""


class VimPdeError(Exception):
    """Base class for package errors."""


class DimensionError(VimPdeError, ValueError):
    """Grid geometry invalid, or two operands live on incompatible grids."""


class ParameterError(VimPdeError, ValueError):
    """A scalar parameter is out of its admissible range."""


class SingularityError(VimPdeError, ValueError):
    """Evaluation point sits on (or a stencil crosses) a singularity."""


class DivergenceError(VimPdeError, ArithmeticError):
    """A solver produced non-finite values.

    ``index`` names the first offending time node, step or iterate when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PgmParseError(VimPdeError, ValueError):
    """Malformed PGM data; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.reason = message
        self.offset = offset
