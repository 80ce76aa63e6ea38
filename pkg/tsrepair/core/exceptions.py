"""Exception hierarchy for tsrepair."""


class RepairError(Exception):
    """Root of every error raised by tsrepair."""
    pass


class InputError(RepairError, ValueError):
    """Raised when inputs violate a precondition (bad index, length, range)."""
    pass


class NumericError(RepairError):
    """Raised when a numeric procedure cannot produce a result."""
    pass


class SingularSystem(NumericError):
    """Raised when the normal equations have a (near) zero pivot."""
    pass


class DegenerateLabels(NumericError):
    """Raised when labeled diffs carry no information (all zero)."""
    pass


class NoFixpoint(NumericError):
    """Raised when the multi-segment parameter iteration does not settle."""
    pass
