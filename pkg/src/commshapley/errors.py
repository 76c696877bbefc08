"""Exception hierarchy.

Every error raised on bad input derives from :class:`CommunityError`, and from
the builtin exception it most resembles so callers can catch either.
"""


class CommunityError(Exception):
    """Base class for all package errors."""


class MissingFile(CommunityError, FileNotFoundError):
    pass


class MalformedRow(CommunityError, ValueError):
    def __init__(self, row, message="malformed row"):
        self.row = row
        super().__init__(f"{message} (data row {row})")


class NegativeDemand(CommunityError, ValueError):
    def __init__(self, agent, t):
        self.agent = agent
        self.t = t
        super().__init__(f"negative demand for agent {agent!r} at step {t}")


class LengthMismatch(CommunityError, ValueError):
    pass


class BoundaryGap(CommunityError, ValueError):
    pass


class IndexOutOfRange(CommunityError, IndexError):
    pass


class EmptyCurve(CommunityError, ValueError):
    pass


class InvalidSpec(CommunityError, ValueError):
    pass


class OutOfRange(CommunityError, ValueError):
    pass


class EmptyTable(CommunityError, ValueError):
    pass


class InvalidCounts(CommunityError, ValueError):
    pass


class IncompleteTable(CommunityError, ValueError):
    pass


class TooManyAgents(CommunityError, ValueError):
    pass


class DegenerateNormalizer(CommunityError, ZeroDivisionError):
    pass


class InsufficientSamples(CommunityError, ValueError):
    pass


class ZeroTruth(CommunityError, ZeroDivisionError):
    pass


class ZeroVector(CommunityError, ValueError):
    pass


class CalendarMismatch(CommunityError, ValueError):
    pass


class KTooLarge(CommunityError, ValueError):
    pass


class ZeroDenominator(CommunityError, ZeroDivisionError):
    pass


class InfeasibleComposition(CommunityError, ValueError):
    pass
