"""Exception types raised across the package."""


class LPFError(Exception):
    """Base class for all package errors."""


class CloudIOError(LPFError, OSError):
    """Unreadable/unwritable file or directory."""


class ParseError(LPFError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class EmptyCloud(LPFError, ValueError):
    pass


class InvalidBandlimit(LPFError, ValueError):
    pass


class NotCentered(LPFError, ValueError):
    pass


class GridMismatch(LPFError, ValueError):
    pass


class InvalidDegreeOrder(LPFError, ValueError):
    pass


class InvalidFilterParam(LPFError, ValueError):
    pass


class ShrinkRequested(LPFError, ValueError):
    pass


class LengthMismatch(LPFError, ValueError):
    pass


class EmptySet(LPFError, ValueError):
    pass


class BandlimitMismatch(LPFError, ValueError):
    pass


class TooFewPoints(LPFError, ValueError):
    pass


class DropTooLarge(LPFError, ValueError):
    pass


class InvalidSpec(LPFError, ValueError):
    pass


class MissingPair(LPFError, ValueError):
    pass
