"""Exception hierarchy shared by all qrtkit modules."""


class QrtError(Exception):
    """Base class for library errors."""


class NotHermitianError(QrtError, ValueError):
    pass


class DimMismatchError(QrtError, ValueError):
    pass


class NotCPError(QrtError, ValueError):
    pass


class NotTPError(QrtError, ValueError):
    pass


class DomainError(QrtError, ValueError):
    pass


class NotFullRankError(QrtError, ValueError):
    pass


class SupportViolationError(QrtError, ValueError):
    pass


class InfeasibleError(QrtError):
    """Raised when a conic program is (detectably) infeasible."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MaxIterationsError(QrtError):
    """Raised when a solver stops without certified optimality."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NotApplicableError(QrtError):
    pass


class DimensionLimitError(QrtError, ValueError):
    pass


class ConfigError(QrtError):
    pass


class ParseError(QrtError, ValueError):
    pass


class IoError(QrtError, OSError):
    pass
