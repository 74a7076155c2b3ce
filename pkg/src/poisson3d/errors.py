"""Exception hierarchy shared by every module of the package."""


class Poisson3DError(Exception):
    """Base class for all package errors."""


class ParseError(Poisson3DError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            message = f"{message} at position {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class UnknownSymbolError(ParseError):
    pass


class DomainError(Poisson3DError, ArithmeticError):
    """Evaluation left the domain of a partial function (ln, division, real powers)."""


class UnboundSymbolError(Poisson3DError, KeyError):
    """A symbol in an expression has no value at evaluation time."""

    def __str__(self):
        return Exception.__str__(self)


class SamplingError(DomainError):
    """Too many sampled points were rejected while verifying an identity."""


class PreconditionError(Poisson3DError):
    """A construction was refused because an input failed its verification.

    ``report`` carries the failing VerificationReport when one exists.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularDenominatorError(Poisson3DError):
    pass


class QuadratureError(Poisson3DError):
    pass


class StepRejectedError(Poisson3DError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
