"""Exception types shared across the package."""


class GroupConvError(Exception):
    """Base class for all package errors."""


class UsageError(GroupConvError, ValueError):
    """Caller passed inconsistent or malformed arguments."""


class DomainError(GroupConvError, ValueError):
    """A point, box or support escapes the region where an operation is defined."""


class CapabilityError(GroupConvError, ValueError):
    """The object cannot support the requested operation (e.g. not enough smoothness)."""


class WordCapError(UsageError):
    """A free-group product left the configured word-length cap."""
