"""Exception hierarchy shared by every module."""


class BetaSwitchError(Exception):
    """Base class for library errors."""


class DivisionBySignUnknown(BetaSwitchError, ArithmeticError):
    """The divisor's sign could not be certified within the precision budget."""


class NoSignChange(BetaSwitchError, ValueError):
    """A polynomial does not change sign across the requested bracket."""


class MultipleRoots(BetaSwitchError, ValueError):
    """A bracket contains more than one root."""


class UnresolvableAtPrecision(BetaSwitchError):
    """A comparison needed by the computation stayed undecided at max precision."""


class OutOfDomain(BetaSwitchError, ValueError):
    """A point left the interval [0, 1/(beta-1)]."""


class NoReturnWithinCap(BetaSwitchError):
    """An orbit did not come back to the switch region within the step cap.

    ``index`` is the number of completed returns before the failure (0 for a
    single first-return call) and ``steps`` the number of steps tried.
    """

    def __init__(self, message, index=0, steps=0):
        super().__init__(message)
        self.index = index
        self.steps = steps


class CapExceeded(BetaSwitchError):
    """A requested return time exceeds the configured time cap."""


class NotAGlst(BetaSwitchError):
    """An operation that needs a GLST met an incomplete branch."""


class KMaxExceeded(BetaSwitchError):
    """Classification ran past the largest marker index allowed."""
