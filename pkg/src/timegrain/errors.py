class TimegrainError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TimegrainError, ValueError):
    pass


class TokenParseError(TimegrainError, ValueError):
    """A temporal-token sequence violates the anchor/offset grammar.

    ``rule`` names the violated rule; ``position`` is the offending index
    (token index or character offset, depending on the caller) when known.
    """

    def __init__(self, message: str, rule: str, position: int | None = None):
        super().__init__(message)
        self.rule = rule
        self.position = position


class ConfigError(TimegrainError, ValueError):
    pass


class RecordValidationError(TimegrainError, ValueError):
    pass


class InputError(TimegrainError, ValueError):
    """Bad evaluation inputs: duplicate, missing or mismatched records."""

    def __init__(self, message: str, ids=()):
        super().__init__(message)
        self.ids = list(ids)


class ExtractorError(TimegrainError, ValueError):
    pass
