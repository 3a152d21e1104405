"""
Errors - Exception hierarchy with stable exit codes per family.
"""

from typing import Any, Optional


class NovarchError(Exception):
    """Base class; every error knows its family and CLI exit code."""

    family = "error"
    exit_code = 1

    def __init__(self, message: str, witness: Optional[Any] = None):
        self.message = message
        self.witness = witness
        super().__init__(message if witness is None else f"{message} (witness: {witness})")

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "family": self.family,
            "message": self.message,
            "witness": None if self.witness is None else str(self.witness),
        }


class MathError(NovarchError):
    family = "math"
    exit_code = 1


class ZeroInversion(MathError):
    pass


class PrecisionExhausted(MathError):
    pass


class NotAComplex(MathError):
    pass


class NotChainMap(MathError):
    pass


class NotSubcomplex(MathError):
    pass


class NotAcyclic(MathError):
    pass


class PerturbationTooLarge(MathError):
    pass


class SeriesDiverged(MathError):
    pass


class Inconclusive(MathError):
    pass


class PointOutsidePolytope(MathError):
    pass


class ClassOutsideCone(MathError):
    pass


class DimensionTooLarge(MathError):
    pass


class MapNotInjective(MathError):
    pass


class NotClose(MathError):
    pass


class IterationStalled(MathError):
    pass


class NotAlmostCommutative(MathError):
    pass


class ImageNotSpanning(MathError):
    pass


class NoInitialObject(MathError):
    pass


class NotClosed(MathError):
    pass


class DocumentError(NovarchError):
    family = "io"
    exit_code = 3


class ParseError(DocumentError):
    pass


class SchemaError(DocumentError):
    """Schema violation located by a JSON pointer."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(message, witness=pointer or None)


class InvariantError(DocumentError):
    pass


USAGE_EXIT_CODE = 2


class UsageError(NovarchError):
    """Unknown subcommand or bad argument values."""

    family = "usage"
    exit_code = USAGE_EXIT_CODE
