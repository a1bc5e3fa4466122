"""Exception types shared across the library."""


class CspError(Exception):
    """Base class for all library errors."""


class EmptySelection(CspError):
    pass


class BadIndex(CspError):
    pass


class ScopeMismatch(CspError):
    pass


class EmptySolutionSet(CspError):
    pass


class ValueOutsideDomain(CspError):
    pass


class WrongLength(CspError):
    pass


class PositionOutOfRange(CspError):
    pass


class LengthMismatch(CspError):
    pass


class OverlappingSelections(CspError):
    pass


class CapExceeded(CspError):
    pass


class BudgetExceeded(CspError):
    pass


class InvalidInstance(CspError):
    pass


class ParseError(CspError):
    """Model file is not well-formed text; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SemanticError(CspError):
    """Model file parsed but violates a structural rule."""
