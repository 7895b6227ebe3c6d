"""Exception hierarchy shared by every tdiqkd module."""


class TDIQKDError(Exception):
    """Base class for all package errors."""


class ZeroVector(TDIQKDError, ValueError):
    pass


class NotOrthogonal(TDIQKDError, ValueError):
    pass


class InvalidState(TDIQKDError, ValueError):
    pass


class InvalidSpectrum(TDIQKDError, ValueError):
    pass


class RangeError(TDIQKDError, ValueError):
    pass


class UnknownLabel(TDIQKDError, KeyError):
    pass


class UnknownSet(TDIQKDError, KeyError):
    pass


class NoOrthogonalPair(TDIQKDError, ValueError):
    pass


class LengthMismatch(TDIQKDError, ValueError):
    pass


class WireFormatError(TDIQKDError, ValueError):
    """Raised when a wire record cannot be parsed."""
