"""Exception hierarchy shared by every module of the package."""


class LevyPassageError(Exception):
    """Base class for all errors raised by levy_passage."""


class DomainError(LevyPassageError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ModelError(LevyPassageError, ValueError):
    """Invalid model parameters or an invalid model file."""


class NumericalError(LevyPassageError, ArithmeticError):
    """A numerical routine failed to reach its requested accuracy."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


class QuadratureError(NumericalError):
    pass


class RootFindingError(NumericalError):
    pass


class InversionError(NumericalError):
    pass


class UnstableError(NumericalError):
    """Finite-difference extrapolation disagreed across the step ladder."""


class UnsupportedInputError(LevyPassageError, ValueError):
    pass
