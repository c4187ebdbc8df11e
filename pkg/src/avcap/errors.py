"""Exception hierarchy shared by every module."""


class AVCError(Exception):
    """Base class for all errors raised by avcap."""


class ParseError(AVCError, ValueError):
    """A spec file is missing, unreadable or not valid JSON of the right shape."""


class ValidationError(AVCError, ValueError):
    """A spec violates one of its invariants.

    Parameters
    ----------
    field : str
        Name of the offending field, e.g. ``"W[0][1][0]"`` or ``"gamma"``.
    message : str
        Human readable explanation.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionMismatch(AVCError, ValueError):
    """Array arguments have inconsistent shapes."""


class NotPSD(AVCError, ValueError):
    """A covariance matrix has an eigenvalue below the clamping threshold."""


class DomainError(AVCError, ValueError):
    """Arguments fall outside the domain where a formula is defined."""


class SolverDidNotConverge(AVCError, RuntimeError):
    """An iterative solver hit its iteration cap above the residual tolerance."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
