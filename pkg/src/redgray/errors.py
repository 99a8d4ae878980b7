"""Exception hierarchy shared across the package."""


class RedGrayError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(RedGrayError):
    """Input violates a precondition (wrong shape, bad value, missing data)."""


class DegenerateInputError(RedGrayError):
    """Input is structurally valid but numerically degenerate (e.g. coincident
    instances that leave a neighbourhood normalizer undefined)."""


class ParseError(RedGrayError):
    """A file could not be parsed; message carries row/column coordinates."""


class EvaluationError(RedGrayError):
    """An evaluation request cannot be satisfied (e.g. too few neighbours)."""
