"""Exception hierarchy shared by all fujita_lab modules."""

from __future__ import annotations


class FujitaLabError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(FujitaLabError, ValueError):
    """An argument lies outside the admissible range of an operation."""


class FieldOverflowError(FujitaLabError, FloatingPointError):
    """A field contains a non-finite sample.

    Attributes
    ----------
    index : tuple of int
        Grid index of the first offending sample.
    """

    def __init__(self, index, message: str | None = None):
        self.index = tuple(int(i) for i in index)
        super().__init__(message or f"non-finite field value at grid index {self.index}")


class SymmetryError(FujitaLabError, ValueError):
    """Spectral coefficients are not conjugate symmetric within tolerance."""


class KernelError(FujitaLabError, ValueError):
    """A convolution kernel violates its positivity or monotonicity hypotheses."""


class BlowUpSignal(FujitaLabError):
    """Raised by a time step when ``|u|**p`` overflows.

    Attributes
    ----------
    time : float
        Time at the start of the failing step.
    """

    def __init__(self, time: float, message: str | None = None):
        self.time = float(time)
        super().__init__(message or f"nonlinearity overflowed in step starting at t={self.time:g}")


class LocalSolveFailure(FujitaLabError):
    """Picard iteration did not contract even after repeated horizon halving."""


class NeedsDenserTrajectoryError(FujitaLabError):
    """Stored trajectory snapshots are too sparse for the requested quadrature."""


class RegressionError(FujitaLabError, ValueError):
    """Too few samples to fit a scaling law."""


class ConfigError(FujitaLabError, ValueError):
    """Invalid experiment configuration.

    Attributes
    ----------
    field : str or None
        Dotted name of the offending key.
    line : int or None
        1-based line number in the configuration source, when known.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
