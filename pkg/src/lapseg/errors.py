"""Exception hierarchy shared across the package."""


class LapsegError(Exception):
    """Base class for all errors raised by lapseg."""


class DecodeError(LapsegError):
    """Malformed image stream. Carries the byte offset where parsing failed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(LapsegError):
    """Well-formed input in a format or mode this package does not handle."""


class ImageTooSmallError(LapsegError):
    """Image below the minimum size an operation requires."""


class DimensionError(LapsegError):
    """Mismatched or impossible dimensions between related inputs."""


class ParameterError(LapsegError):
    """Out-of-range or unknown parameter value."""


class InsufficientDataError(LapsegError):
    """Too few samples for the operation (e.g. statistics over one row)."""


class TooManyClassesError(LapsegError):
    """Class count exceeds what the output format can index."""


class MissingSeedsError(LapsegError):
    """Segmentation requested with no labeled pixel of any class."""


class UndefinedMetricError(LapsegError):
    """Metric requested on an input where it has no defined value."""


class TrimapFormatError(LapsegError):
    """Trimap contains a gray level outside the {0, 64, 128, 255} alphabet."""
