"""Exception hierarchy shared by every module."""


class BergmanLabError(Exception):
    """Base class for all errors raised by bergmanlab."""


class InvalidParameter(BergmanLabError, ValueError):
    pass


class UnsupportedOrder(BergmanLabError, ValueError):
    pass


class UnsupportedIndex(BergmanLabError, ValueError):
    pass


class UnsupportedDomain(BergmanLabError, ValueError):
    pass


class TruncationInsufficient(BergmanLabError, ArithmeticError):
    pass


class QuadratureTooCoarse(BergmanLabError, ArithmeticError):
    pass


class NonHolomorphicSymbol(BergmanLabError, ValueError):
    pass


class NoConvergence(BergmanLabError, ArithmeticError):
    pass


class DisconnectedPatch(BergmanLabError, ValueError):
    pass


class SymbolError(BergmanLabError, ValueError):
    """Parse-time error carrying the character offset into the source text."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class SymbolSyntaxError(SymbolError):
    pass


class UnknownIdentifier(SymbolError):
    pass


class BadArity(SymbolError):
    pass


class BadExponent(SymbolError):
    pass


class DivisionByNearZero(BergmanLabError, ZeroDivisionError):
    pass


class ConfigError(BergmanLabError, ValueError):
    pass


class UnknownScenario(BergmanLabError, KeyError):
    pass
