"""Exception hierarchy shared by every hpnfft module."""

__all__ = [
    "HpnfftError",
    "InvalidBandwidthError",
    "ShapeError",
    "UndefinedReferenceError",
    "DegenerateWindowError",
    "InvalidWindowError",
    "InvalidTopologyError",
    "CommunicationError",
    "ProtocolError",
    "InvalidSizeError",
    "InvalidCutoffError",
    "BandwidthError",
    "FormatError",
    "ResourceError",
]


class HpnfftError(Exception):
    """Base class for all library errors."""


class InvalidBandwidthError(HpnfftError, ValueError):
    pass


class ShapeError(HpnfftError, ValueError):
    pass


class UndefinedReferenceError(HpnfftError, ValueError):
    """Raised when a relative error is requested against an all-zero reference."""


class DegenerateWindowError(HpnfftError, ArithmeticError):
    """A Fourier weight of the window is too small to divide by."""


class InvalidWindowError(HpnfftError, ValueError):
    pass


class InvalidTopologyError(HpnfftError, ValueError):
    pass


class CommunicationError(HpnfftError):
    """Transport failure; ``peer`` is the rank that could not be reached."""

    def __init__(self, message, peer=None):
        super().__init__(message if peer is None else f"{message} (peer rank {peer})")
        self.peer = peer


class ProtocolError(HpnfftError):
    """Malformed frame, unexpected message or inconsistent collective call."""


class InvalidSizeError(HpnfftError, ValueError):
    pass


class InvalidCutoffError(HpnfftError, ValueError):
    pass


class BandwidthError(HpnfftError, ValueError):
    """A requested frequency lies outside the transform's index set."""


class FormatError(HpnfftError, ValueError):
    """Bad point file; ``offset`` is the byte position of the offending field."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class ResourceError(HpnfftError, MemoryError):
    pass
