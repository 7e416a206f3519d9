"""Exception hierarchy shared by every module."""


class FractalError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 2


class InvariantViolation(FractalError):
    pass


class SingularMap(InvariantViolation):
    pass


class InvalidWord(FractalError):
    pass


class NotContractive(FractalError):
    pass


class BudgetExceeded(FractalError):
    exit_code = 3


class DimMismatch(FractalError):
    pass


class NotNonOverlapping(FractalError):
    pass


class InvalidMask(FractalError):
    pass


class GraphError(FractalError):
    pass


class OutsideAttractor(FractalError):
    pass


class OutsideExpansion(FractalError):
    pass


class ConfigError(FractalError):
    exit_code = 1
