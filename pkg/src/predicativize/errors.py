"""Exception hierarchy shared by the kernel, the level solver and the pipeline."""

from __future__ import annotations


class PredicativizeError(Exception):
    """Base class for every error raised by this package."""


class LevelKindViolation(PredicativizeError):
    pass


class NotALevel(PredicativizeError):
    pass


class UnboundVariable(PredicativizeError):
    pass


class FuelExhausted(PredicativizeError):
    """Raised when reduction exceeds its step budget (possible divergence)."""


class UnknownConstant(PredicativizeError):
    pass


class IllFormedSpec(PredicativizeError):
    pass


class TypeCheckError(PredicativizeError):
    """A judgment of the plain type checker failed.

    ``entry`` is the signature entry being checked (if any), ``subterm`` the
    offending term, and ``expected``/``got`` the two types that did not match.
    """

    def __init__(self, message, *, entry=None, subterm=None, expected=None, got=None):
        super().__init__(message)
        self.entry = entry
        self.subterm = subterm
        self.expected = expected
        self.got = got


class InferenceFailure(PredicativizeError):
    pass


class NotUnifiableStructure(PredicativizeError):
    pass


class ParseError(PredicativizeError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


class UnsupportedConstruct(PredicativizeError):
    pass


class InternalError(PredicativizeError):
    """An invariant guaranteed by construction was violated."""


class IndexOutOfRange(PredicativizeError):
    """A user constraint names a metavariable the entry does not have."""
