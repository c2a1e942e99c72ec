"""Exception types raised by the package."""


class MultigraphonError(ValueError):
    """Base class for validation errors."""


class InvalidSpecError(MultigraphonError):
    pass


class ProbabilityOverflowError(MultigraphonError):
    """Raised when rho * f exceeds one somewhere on the unit cube."""


class InvalidInputError(MultigraphonError):
    pass


class UndefinedStatisticError(MultigraphonError):
    pass
