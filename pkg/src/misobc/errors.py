"""Exception types raised across the package."""


class MisoBCError(Exception):
    """Base class for all package errors."""


class ZeroVector(MisoBCError, ValueError):
    pass


class SingularMatrix(MisoBCError, ValueError):
    pass


class BadPower(MisoBCError, ValueError):
    pass


class DegenerateRealization(MisoBCError, ValueError):
    """A probability-zero channel event (vanishing effective gain)."""


class TruncationTooSmall(MisoBCError, ValueError):
    pass


class OutOfRange(MisoBCError, ValueError):
    pass
