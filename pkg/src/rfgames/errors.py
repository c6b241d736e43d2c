"""Exception types. Every error carries a stable machine-readable ``code``."""


class RFGError(Exception):
    code = "ERROR"

    def __init__(self, message="", code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class InvalidGame(RFGError, ValueError):
    code = "INVALID_GAME"


class InvalidReaction(RFGError, ValueError):
    code = "INVALID_REACTION"


class UnknownPlayer(RFGError, KeyError):
    code = "UNKNOWN_PLAYER"


class IncompleteProfile(RFGError, ValueError):
    code = "INCOMPLETE_PROFILE"


class BudgetExceeded(RFGError):
    code = "BUDGET_EXCEEDED"


class NonMonotoneProfile(RFGError, ValueError):
    code = "NON_MONOTONE_PROFILE"


class TargetBelowMaxmin(RFGError, ValueError):
    code = "TARGET_BELOW_MAXMIN"


class NotTwoPlayer(RFGError, ValueError):
    code = "NOT_TWO_PLAYER"


class UnsupportedDimensions(RFGError, ValueError):
    code = "UNSUPPORTED_DIMENSIONS"


class NotSafeRFE(RFGError, ValueError):
    code = "NOT_SAFE_RFE"


class NotImprovement(RFGError, ValueError):
    code = "NOT_IMPROVEMENT"


class ParameterOutOfRange(RFGError, ValueError):
    code = "PARAMETER_OUT_OF_RANGE"


class WrongKind(RFGError, ValueError):
    code = "WRONG_KIND"


class ProtocolError(RFGError):
    """Rejected coordinator event; ``code`` names the violated rule."""

    code = "PROTOCOL_ERROR"


class EmptyPools(RFGError, ValueError):
    code = "EMPTY_POOLS"


class ParseError(RFGError, ValueError):
    code = "PARSE_ERROR"

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
