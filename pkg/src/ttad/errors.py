""" Exception hierarchy shared by the library, the CLI and the service. """

from typing import Optional


class TTADError(Exception):
    """
    Base class for every error raised by the toolkit.

    Attributes
    ----------
    exit_code : int
        Process exit code used by the command-line interface.
    tau : float, optional
        Compression factor at which the error occurred, set by the sweep harness.
    """

    exit_code: int = 1

    def __init__(self, message: str, tau: Optional[float] = None) -> None:
        super().__init__(message)
        self.tau = tau

    def at_tau(self, tau: float) -> "TTADError":
        """Return a copy of this error tagged with the compression factor ``tau``."""
        return type(self)(f"tau={tau}: {self}", tau=tau)


class ConfigError(TTADError):
    """Invalid configuration: bad tau, bad factor shape, empty tau list."""

    exit_code = 1


class DataError(TTADError):
    """Input data cannot be used as given."""

    exit_code = 2


class DimensionError(DataError):
    """Feature widths or factor shapes do not match."""


class IndexBoundsError(DataError):
    """An index lies outside its dimension."""


class StructuralError(DataError):
    """A tensor-train chain is malformed (bond mismatch, corrupt container)."""


class SamplingError(DataError):
    """Not enough rows of a class to draw the requested sample."""


class EvaluationError(DataError):
    """Labels do not allow an ROC evaluation."""


class DegenerateInputError(TTADError):
    """The matrix to decompose is identically zero."""

    exit_code = 3
