"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` and data problems
from :class:`DataError`; the command-line front end maps them to exit
codes 1 and 2 respectively.
"""


class VBVarSelError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(VBVarSelError, ValueError):
    pass


class DataError(VBVarSelError, ValueError):
    pass


class InvalidHyperparameter(ConfigError):
    def __init__(self, name, value, bound):
        self.name = name
        self.value = value
        super().__init__(f"hyperparameter {name}={value!r} violates {bound}")


class InvalidSchedule(ConfigError):
    pass


class InvalidSpec(ConfigError):
    pass


class UnknownTable(ConfigError):
    pass


class ZeroVarianceColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance")


class ParseError(DataError):
    def __init__(self, line, column, message="could not parse cell"):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class RaggedRow(ParseError):
    def __init__(self, line, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(line, found, f"expected {expected} fields, found {found}")


class NonNumericCell(ParseError):
    def __init__(self, line, column, text):
        self.text = text
        super().__init__(line, column, f"non-numeric or non-finite cell {text!r}")


class LengthMismatch(DataError):
    pass


class InvalidCounts(DataError):
    pass


class NotPositiveDefinite(DataError):
    pass


class NumericalUnderflow(DataError):
    pass


class NonFiniteElbo(VBVarSelError, FloatingPointError):
    pass
