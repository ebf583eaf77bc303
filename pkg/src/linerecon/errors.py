"""Exception types raised across the package."""


class ReconError(Exception):
    """Base class for all errors raised by linerecon."""


class DuplicateCoordinate(ReconError, ValueError):
    """Two labels were given the same coordinate."""


class SamePoint(ReconError, ValueError):
    """An operation on an ordered pair received the same label twice."""


class InconsistentDeduction(ReconError):
    """A pair received two different distances.

    Never raised on faithfully observed data; it signals corrupted input
    or a bug in the deduction pipeline.
    """


class WalkBudgetExceeded(ReconError):
    """Cycle enumeration explored more walks than its budget allows."""


class OracleCapExceeded(ReconError):
    """A component is too large for exhaustive embedding enumeration."""
