"""Exception hierarchy shared by every module of the engine."""


class MicroformalError(Exception):
    """Base class for all engine errors."""


class ParityError(MicroformalError, ValueError):
    """A value has the wrong Z/2 parity, or no definite parity at all."""


class ChartError(MicroformalError, ValueError):
    """A polynomial or object does not live on the expected chart."""


class NonFormalError(MicroformalError, ArithmeticError):
    """A fixed-point elimination does not converge in the nilpotent/adic sense."""


class SingularError(MicroformalError, ArithmeticError):
    """A linear part that must be invertible is singular."""


class ParseError(MicroformalError, ValueError):
    """Malformed polynomial text or problem file."""

    def __init__(self, message, position=None, line=None):
        self.message = message
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where = f" (line {line}"
            where += f", column {position})" if position is not None else ")"
        elif position is not None:
            where = f" (at position {position})"
        super().__init__(message + where)
