"""Error codes shared by the kernel, the translator and the frontend.

Every rejection raised out of the kernel carries a stable ``code`` string so
the frontend can format diagnostics as ``file:line:col: code: message``.
"""

from __future__ import annotations


class CicrError(Exception):
    """Base class for all checker errors."""

    code = "Error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message


# term_core / reduce

class FuelExhausted(CicrError):
    code = "FuelExhausted"


class MalformedCase(CicrError):
    code = "MalformedCase"


# typecheck

class UnboundVariable(CicrError):
    code = "UnboundVariable"


class NotAFunction(CicrError):
    code = "NotAFunction"


class SortMismatch(CicrError):
    code = "SortMismatch"


class UniverseError(CicrError):
    code = "UniverseError"


class TypeMismatch(CicrError):
    code = "TypeMismatch"


class NotAnArity(CicrError):
    code = "NotAnArity"


class PositivityViolation(CicrError):
    code = "PositivityViolation"


class ConstructorIllTyped(CicrError):
    code = "ConstructorIllTyped"


class NameClash(CicrError):
    code = "NameClash"


class IllegalElimination(CicrError):
    code = "IllegalElimination"


class BranchMismatch(CicrError):
    code = "BranchMismatch"


class MotiveMismatch(CicrError):
    code = "MotiveMismatch"


class GuardViolation(CicrError):
    code = "GuardViolation"


class AnnotationNotAType(CicrError):
    code = "AnnotationNotAType"


class IllTyped(CicrError):
    code = "IllTyped"


class WitnessTypeMismatch(CicrError):
    code = "WitnessTypeMismatch"


# param

class MissingWitness(CicrError):
    code = "MissingWitness"

    def __init__(self, axiom: str):
        super().__init__(f"axiom {axiom} has no registered parametricity witness")
        self.axiom = axiom


class NotSmallInductive(CicrError):
    code = "NotSmallInductive"


class NotSupported(CicrError):
    code = "NotSupported"


# frontend

class ParseError(CicrError):
    code = "ParseError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.line = line
        self.col = col
