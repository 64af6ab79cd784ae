"""Exception hierarchy shared by every module."""


class QTruncError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 2


class StructuralError(QTruncError, ValueError):
    """An element, label or group id does not fit the structure it was used with."""


class PreconditionError(QTruncError, ValueError):
    """An operation was called outside its documented domain."""


class ResourceError(QTruncError):
    """A configured budget (ball size, iteration cap) would be exceeded."""

    exit_code = 3


class ConvergenceError(QTruncError):
    """An optimization or iteration failed to reach its tolerance."""

    exit_code = 3
