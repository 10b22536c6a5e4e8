"""Structured errors raised on degenerate or inconsistent input."""

from __future__ import annotations


class GeometryError(ValueError):
    """Base class; ``ids`` names the offending input objects when known."""

    def __init__(self, message: str, ids: tuple = ()):
        super().__init__(message)
        self.ids = tuple(ids)


class GeneralPositionViolation(GeometryError):
    pass


class VerticalLine(GeometryError):
    pass


class DegenerateDualPair(GeometryError):
    pass


class VerticalDualLine(GeometryError):
    pass


class ParallelGammaLines(GeometryError):
    pass


class ParallelLines(GeometryError):
    pass


class DisjointnessViolation(GeometryError):
    pass


class LevelMismatch(GeometryError):
    pass


class InconsistentOrderType(GeometryError):
    pass


class SampleFailure(RuntimeError):
    pass


class OracleContractViolation(RuntimeError):
    pass


class MissingCoverage(KeyError):
    pass


class GenerationTimeout(RuntimeError):
    pass


class InstanceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
