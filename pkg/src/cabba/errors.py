class CabbaError(Exception):
    """Base class for domain failures (CLI exit code 1)."""


class InvalidConfig(CabbaError, ValueError):
    pass


class IndexOutOfRange(CabbaError, ValueError):
    pass


class InvalidOrder(CabbaError, ValueError):
    pass


class MacTooLong(CabbaError, ValueError):
    pass


class ChainCorrupt(CabbaError):
    pass


class LayoutViolation(CabbaError, ValueError):
    pass


class UnknownFrameType(CabbaError):
    pass


class CrcMismatch(CabbaError):
    pass


class RsUncorrectable(CabbaError):
    pass


class SymbolAlignment(CabbaError, ValueError):
    pass


class AlignmentError(CabbaError, ValueError):
    pass


class NoPreamble(CabbaError):
    pass


class ZeroValidRows(CabbaError):
    pass
