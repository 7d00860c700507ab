"""Exception types shared across the toolkit."""


class VLScoreError(Exception):
    """Base class for all toolkit errors."""


class InputError(VLScoreError):
    """Bad user-supplied data: malformed files, unresolvable ids, invalid arguments."""


class InternalConsistencyError(VLScoreError):
    """A numerical result outside what floating-point rounding can explain."""
