"""Exception taxonomy shared by all sradiag modules.

The CLI maps these onto distinct exit codes, so new error conditions
should reuse one of the classes below rather than raising bare built-ins.
"""


class SradiagError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SradiagError):
    """Malformed or truncated input stream.

    Parameters
    ----------
    message : str
    byte_offset : int, optional
        Offset into the raw stream where decoding failed.
    """

    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class OrderingError(SradiagError):
    """Event times are not non-decreasing."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)
        self.index = index


class DuplicateTickError(SradiagError):
    """Zero inter-arrival gap encountered without deduplication enabled."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)
        self.index = index


class InsufficientDataError(SradiagError):
    """Not enough usable samples for the requested operation."""


class DomainError(SradiagError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """Evaluation requested at a structurally divergent point (rank 1)."""


class ModelMismatchError(SradiagError):
    """Data are incompatible with the requested model family."""


class ConvergenceError(SradiagError):
    """Iterative fit did not converge within its iteration budget.

    Attributes
    ----------
    best : object or None
        Best iterate reached before giving up, when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(SradiagError, ValueError):
    """Invalid configuration object."""
