"""Diagnostics raised by the front end, the checker and the simulator."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class QmlError(Exception):
    """Base class; ``code`` is the stable diagnostic name."""

    code = "QmlError"

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.function: str | None = None

    def diagnostic(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "function": self.function,
            "span": asdict(self.span) if self.span else None,
        }

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        fn = f"in '{self.function}': " if self.function else ""
        return f"{where}{self.code}: {fn}{self.message}"


class QmlSyntaxError(QmlError):
    code = "SyntaxError"


class DuplicateDefinition(QmlError):
    code = "DuplicateDefinition"


class UnknownFunction(QmlError):
    code = "UnknownFunction"


class UnboundVariable(QmlError):
    code = "UnboundVariable"


class UnusedVariable(QmlError):
    code = "UnusedVariable"


class TypeMismatch(QmlError):
    code = "TypeMismatch"


class TypeClash(QmlError):
    code = "TypeClash"


class StrictnessViolation(QmlError):
    code = "StrictnessViolation"


class UnbalancedSum(QmlError):
    code = "UnbalancedSum"


class NotOrthogonal(QmlError):
    code = "NotOrthogonal"


class InvalidAmplitude(QmlError):
    code = "InvalidAmplitude"


class ShapeError(QmlError):
    code = "ShapeError"


class ShapeMismatch(QmlError):
    code = "ShapeMismatch"


class TooLarge(QmlError):
    code = "TooLarge"


class NotStrict(QmlError):
    code = "NotStrict"


class NotNormalized(QmlError):
    code = "NotNormalized"
