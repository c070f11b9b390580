"""Exception hierarchy shared by the library and the command line."""


class CQCapError(Exception):
    """Base class for every error raised by :mod:`cqcap`."""

    exit_code = 1


class ArgumentError(CQCapError, ValueError):
    """Arguments are malformed or mutually inconsistent (shapes, lengths)."""

    exit_code = 1


class ValidationError(CQCapError, ValueError):
    """An input violates a mathematical invariant (Hermiticity, trace, ...)."""

    exit_code = 2


class ResourceError(CQCapError):
    """A computation would exceed a configured dimension cap."""

    exit_code = 3


class ConvergenceError(CQCapError):
    """An iterative method stopped before reaching its tolerance."""

    exit_code = 4


class DegenerateDecoderError(CQCapError):
    """The typical subspace is empty, so no decoder can be built."""

    exit_code = 2
