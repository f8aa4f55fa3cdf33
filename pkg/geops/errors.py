"""Exception hierarchy shared by every geops module."""


class GeopsError(Exception):
    """Base class for all errors raised by geops."""


class ParseError(GeopsError, ValueError):
    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        if position >= 0:
            pointer = " " * position + "^"
            message = f"{message} (at position {position})\n  {text}\n  {pointer}"
        super().__init__(message)


class PreconditionError(GeopsError, ValueError):
    """An operation was called outside its domain."""


class DescentError(PreconditionError):
    pass


class BadPrimeError(PreconditionError):
    def __init__(self, p: int, obstruction: str):
        self.p = p
        self.obstruction = obstruction
        super().__init__(f"bad prime {p}: {obstruction}")


class RecurrenceError(GeopsError, ValueError):
    pass


class InconsistencyError(GeopsError, RuntimeError):
    """An internal self-check failed; the result cannot be trusted."""
