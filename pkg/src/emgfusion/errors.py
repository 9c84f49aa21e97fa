"""Exception types raised across the package."""


class EmgFusionError(Exception):
    """Base class for all package errors."""


class InvalidSignal(EmgFusionError, ValueError):
    pass


class NyquistViolation(EmgFusionError, ValueError):
    pass


class WindowTooShort(EmgFusionError, ValueError):
    pass


class ParseError(EmgFusionError, ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownLabel(EmgFusionError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown label"


class InvalidProbability(EmgFusionError, ValueError):
    pass


class InsufficientClassData(EmgFusionError, ValueError):
    pass


class StratificationError(EmgFusionError, ValueError):
    pass


class UnknownCommand(ParseError):
    pass


class ConflictingAlias(ParseError):
    pass


class DimensionError(EmgFusionError, ValueError):
    pass


class InvalidWeights(EmgFusionError, ValueError):
    pass


class UnknownPin(EmgFusionError, ValueError):
    pass


class EmptyInput(EmgFusionError, ValueError):
    pass


class InsufficientData(EmgFusionError, ValueError):
    pass


class ProtocolError(EmgFusionError):
    """A reply line from the control server did not match the wire grammar."""
