"""Exception hierarchy shared by all modules."""


class RParityError(Exception):
    pass


class ParseError(RParityError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidXorBlock(RParityError, ValueError):
    pass


class BlockTooLarge(RParityError, ValueError):
    pass


class TooLarge(RParityError, ValueError):
    pass


class EmptyDomain(RParityError, ValueError):
    pass


class InvalidParameter(RParityError, ValueError):
    pass


class InvalidConstraint(RParityError, ValueError):
    pass


class TooSmall(RParityError, ValueError):
    pass


class EmptyConstraint(RParityError, ValueError):
    pass


class NotGSigma(RParityError, ValueError):
    pass


class NotTseitin(RParityError, ValueError):
    pass


class EmptyCore(RParityError, ValueError):
    pass


class PivotNotFresh(RParityError, ValueError):
    pass


class MissingBlocks(RParityError, ValueError):
    pass


class InvalidTarget(RParityError, ValueError):
    pass


class InsufficientData(RParityError, ValueError):
    pass


class ConfigError(RParityError):
    pass


class IoError(RParityError, OSError):
    pass
