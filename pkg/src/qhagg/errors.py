"""Exception taxonomy shared by all modules.

Numerical check *failures* are never raised as exceptions; they travel in
report objects. Exceptions are reserved for contract violations: malformed
input text, out-of-domain values, and use of an object outside its declared
structure.
"""


class QhaggError(Exception):
    """Base class for all library errors."""


class DomainError(QhaggError):
    """A value lies outside the domain a contract requires."""


class ContractError(QhaggError):
    """An object was used or built against its declared structure.

    Carries an optional ``report`` attribute with the validation report
    that triggered the rejection.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ExprError(QhaggError):
    """Base class for expression front-end errors."""


class ParseError(ExprError):
    """Lexical or syntax error; ``position`` is a 0-based offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class EvalError(ExprError):
    """Expression evaluation failed (division by zero, bad power, overflow)."""
