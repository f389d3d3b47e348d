class TagcalcError(Exception):
    """Base class for all errors raised by tagcalc."""


class ShapeError(TagcalcError):
    """An expression does not have the word shape an operation requires."""


class UnsupportedFeature(TagcalcError):
    """A rule was asked to handle something outside its supported class."""


class UnregisteredPairing(TagcalcError):
    """An extractor/tag pair, basis, or unitary kernel is not in the basis table."""


class DivergenceError(TagcalcError):
    """Normalization exceeded its step budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(TagcalcError):
    """Syntax or shape error in DSL source, with a 1-based line:column."""

    def __init__(self, message, line=1, column=1, source=None):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{line}:{column}: {message}")


class ShapeParseError(ParseError, ShapeError):
    """Well-formed syntax with an illegal shape, such as an operator inside a ket."""
